// Copyright 2026 The RelPrior Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "relprior/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "string_bridge.h"

namespace relprior {

using nlohmann::json;

std::string CaseFold(std::string_view s) {
  return absl::AsciiStrToLower(Sv(s));
}

std::string FoldAndCollapse(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (absl::ascii_isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(absl::ascii_tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  absl::string_view t = absl::StripAsciiWhitespace(Sv(s));
  return {t.data(), t.size()};
}

bool IsRelationCode(std::string_view code) {
  if (code.size() < 2 || code[0] != 'P') return false;
  return std::all_of(code.begin() + 1, code.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

// ---------------------------------------------------------------------------
// RelationRegistry

absl::StatusOr<RelationRegistry> RelationRegistry::Create(
    std::vector<RelationId> entries) {
  if (entries.empty()) {
    return absl::InvalidArgumentError("relation registry is empty");
  }
  RelationRegistry reg;
  for (size_t i = 0; i < entries.size(); ++i) {
    const RelationId& e = entries[i];
    if (!IsRelationCode(e.code)) {
      return absl::InvalidArgumentError(
          absl::StrCat("relation code '", e.code, "' is not of the form P<digits>"));
    }
    if (Trim(e.name).empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("relation ", e.code, " has an empty name"));
    }
    if (!reg.code_index_.emplace(e.code, i).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate relation code ", e.code));
    }
    if (!reg.name_index_.emplace(CaseFold(e.name), i).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate relation name '", e.name, "'"));
    }
  }
  reg.entries_ = std::move(entries);
  return reg;
}

absl::Status RelationRegistry::SetAliases(
    const std::map<std::string, std::string>& aliases) {
  std::unordered_map<std::string, size_t> index;
  for (const auto& [label, code] : aliases) {
    auto it = code_index_.find(code);
    if (it == code_index_.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "alias '", label, "' targets unknown relation code ", code));
    }
    index[CaseFold(Trim(label))] = it->second;
  }
  alias_index_ = std::move(index);
  return absl::OkStatus();
}

const RelationId* RelationRegistry::FindByCode(std::string_view code) const {
  auto it = code_index_.find(std::string(code));
  return it == code_index_.end() ? nullptr : &entries_[it->second];
}

const RelationId* RelationRegistry::FindByName(std::string_view name) const {
  auto it = name_index_.find(CaseFold(name));
  return it == name_index_.end() ? nullptr : &entries_[it->second];
}

const RelationId* RelationRegistry::FindByAlias(std::string_view label) const {
  auto it = alias_index_.find(CaseFold(label));
  return it == alias_index_.end() ? nullptr : &entries_[it->second];
}

std::optional<size_t> RelationRegistry::IndexOf(std::string_view code) const {
  auto it = code_index_.find(std::string(code));
  if (it == code_index_.end()) return std::nullopt;
  return it->second;
}

const std::string& RelationRegistry::NameOf(std::string_view code) const {
  return entries_.at(code_index_.at(std::string(code))).name;
}

namespace {

// Numeric P-code order, so registry order does not depend on how the JSON
// object happened to be stored.
bool CodeLess(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

absl::StatusOr<json> ParseJsonText(const std::string& text,
                                   const std::string& what) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    // Re-parse with exceptions to recover the byte position.
    try {
      [[maybe_unused]] json probe = json::parse(text);
    } catch (const json::parse_error& e) {
      return absl::InvalidArgumentError(
          absl::StrCat(what, ": malformed JSON at byte ", e.byte, ": ", e.what()));
    }
    return absl::InvalidArgumentError(absl::StrCat(what, ": malformed JSON"));
  }
  return j;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return absl::DataLossError(absl::StrCat("read failed: ", path));
  return buf.str();
}

// Top-level object keys in file order, duplicates included. nlohmann keeps
// only the last value for a repeated key, so they are collected separately.
std::vector<std::string> TopLevelKeys(const std::string& text) {
  std::vector<std::string> keys;
  json::parser_callback_t cb = [&keys](int depth, json::parse_event_t event,
                                       json& parsed) {
    if (event == json::parse_event_t::key && depth == 1) {
      keys.push_back(parsed.get<std::string>());
    }
    return true;
  };
  [[maybe_unused]] json walked = json::parse(text, cb, /*allow_exceptions=*/false);
  return keys;
}

absl::Status DuplicateKeyCheck(const std::string& text,
                               const std::string& path) {
  std::set<std::string> seen;
  for (const std::string& k : TopLevelKeys(text)) {
    if (!seen.insert(k).second) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": duplicate key ", k));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<RelationRegistry> ParseRelationRegistry(const json& rel_info) {
  if (!rel_info.is_object()) {
    return absl::InvalidArgumentError(
        "relation info must be a JSON object mapping P-code to name");
  }
  std::vector<RelationId> entries;
  for (const auto& [code, name] : rel_info.items()) {
    if (!name.is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat("relation ", code, ": name must be a string"));
    }
    entries.push_back({code, name.get<std::string>()});
  }
  std::sort(entries.begin(), entries.end(),
            [](const RelationId& a, const RelationId& b) {
              return CodeLess(a.code, b.code);
            });
  return RelationRegistry::Create(std::move(entries));
}

absl::StatusOr<std::map<std::string, std::string>> ParseAliasTable(
    const json& aliases) {
  if (!aliases.is_object()) {
    return absl::InvalidArgumentError(
        "alias table must be a JSON object mapping label to P-code");
  }
  std::map<std::string, std::string> out;
  for (const auto& [label, code] : aliases.items()) {
    if (!code.is_string() || !IsRelationCode(code.get<std::string>())) {
      return absl::InvalidArgumentError(
          absl::StrCat("alias '", label, "': target must be a P-code string"));
    }
    out[label] = code.get<std::string>();
  }
  return out;
}

absl::StatusOr<RelationRegistry> LoadRelationRegistry(
    const std::string& path, const std::optional<std::string>& alias_path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  if (Trim(*text).empty()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": empty file"));
  }
  absl::StatusOr<json> j = ParseJsonText(*text, path);
  if (!j.ok()) return j.status();
  if (absl::Status s = DuplicateKeyCheck(*text, path); !s.ok()) return s;
  absl::StatusOr<RelationRegistry> reg = ParseRelationRegistry(*j);
  if (!reg.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", reg.status().message()));
  }
  if (alias_path.has_value()) {
    absl::StatusOr<std::string> atext = ReadFile(*alias_path);
    if (!atext.ok()) return atext.status();
    absl::StatusOr<json> aj = ParseJsonText(*atext, *alias_path);
    if (!aj.ok()) return aj.status();
    absl::StatusOr<std::map<std::string, std::string>> table =
        ParseAliasTable(*aj);
    if (!table.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(*alias_path, ": ", table.status().message()));
    }
    if (absl::Status s = reg->SetAliases(*table); !s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(*alias_path, ": ", s.message()));
    }
  }
  return reg;
}

// ---------------------------------------------------------------------------
// Documents

const std::string& RepresentativeName(const Entity& entity) {
  const Mention* best = &entity.mentions.front();
  for (const Mention& m : entity.mentions) {
    if (m.name.size() > best->name.size()) best = &m;
  }
  return best->name;
}

std::string DocumentText(const Document& doc) {
  std::string out;
  for (const auto& sent : doc.sents) {
    for (const std::string& tok : sent) {
      if (!out.empty()) out.push_back(' ');
      out += tok;
    }
  }
  return out;
}

absl::Status ValidateDocument(const Document& doc,
                              const RelationRegistry* registry) {
  auto fail = [&doc](const std::string& field, const std::string& why) {
    return absl::InvalidArgumentError(
        absl::StrCat("document '", doc.title, "': ", field, ": ", why));
  };
  const int n_sents = static_cast<int>(doc.sents.size());
  const int n_ents = static_cast<int>(doc.entities.size());
  for (int e = 0; e < n_ents; ++e) {
    const Entity& ent = doc.entities[e];
    std::string field = absl::StrCat("vertexSet[", e, "]");
    if (ent.index != e) return fail(field, "index does not match position");
    if (ent.mentions.empty()) return fail(field, "entity has no mentions");
    for (size_t m = 0; m < ent.mentions.size(); ++m) {
      const Mention& men = ent.mentions[m];
      std::string mfield = absl::StrCat(field, "[", m, "]");
      if (men.sent_id < 0 || men.sent_id >= n_sents) {
        return fail(mfield + ".sent_id",
                    absl::StrCat(men.sent_id, " out of range [0, ", n_sents, ")"));
      }
      const int len = static_cast<int>(doc.sents[men.sent_id].size());
      if (men.start < 0 || men.start >= men.end || men.end > len) {
        return fail(mfield + ".pos",
                    absl::StrCat("[", men.start, ", ", men.end,
                                 ") invalid for sentence of ", len, " tokens"));
      }
    }
  }
  for (size_t i = 0; i < doc.gold.size(); ++i) {
    const GoldTriple& g = doc.gold[i];
    std::string field = absl::StrCat("labels[", i, "]");
    if (g.h < 0 || g.h >= n_ents || g.t < 0 || g.t >= n_ents) {
      return fail(field, absl::StrCat("entity index out of range (h=", g.h,
                                      ", t=", g.t, ", entities=", n_ents, ")"));
    }
    if (g.h == g.t) return fail(field, "head equals tail");
    if (!IsRelationCode(g.r)) {
      return fail(field + ".r", absl::StrCat("'", g.r, "' is not a P-code"));
    }
    if (registry != nullptr && registry->FindByCode(g.r) == nullptr) {
      return fail(field + ".r",
                  absl::StrCat(g.r, " not in the relation registry"));
    }
    for (int ev : g.evidence) {
      if (ev < 0 || ev >= n_sents) {
        return fail(field + ".evidence",
                    absl::StrCat("sentence ", ev, " out of range"));
      }
    }
  }
  return absl::OkStatus();
}

namespace {

// Schema-level conversion of one record. Type mismatches surface as
// json::type_error and are converted by the caller.
Document RecordToDocument(const json& rec, bool expect_gold) {
  Document doc;
  doc.title = rec.at("title").get<std::string>();
  for (const json& sent : rec.at("sents")) {
    doc.sents.push_back(sent.get<std::vector<std::string>>());
  }
  int idx = 0;
  for (const json& ent : rec.at("vertexSet")) {
    Entity e;
    e.index = idx++;
    for (const json& men : ent) {
      Mention m;
      m.name = men.at("name").get<std::string>();
      m.sent_id = men.at("sent_id").get<int>();
      const json& pos = men.at("pos");
      if (!pos.is_array() || pos.size() != 2) {
        throw std::invalid_argument("pos must be a [start, end] pair");
      }
      m.start = pos[0].get<int>();
      m.end = pos[1].get<int>();
      m.type = men.value("type", std::string());
      e.mentions.push_back(std::move(m));
    }
    doc.entities.push_back(std::move(e));
  }
  if (expect_gold && !rec.contains("labels")) {
    throw std::invalid_argument("missing \"labels\"");
  }
  if (rec.contains("labels")) {
    for (const json& lab : rec.at("labels")) {
      GoldTriple g;
      g.h = lab.at("h").get<int>();
      g.t = lab.at("t").get<int>();
      g.r = lab.at("r").get<std::string>();
      if (lab.contains("evidence")) {
        g.evidence = lab.at("evidence").get<std::vector<int>>();
      }
      doc.gold.push_back(std::move(g));
    }
  }
  return doc;
}

}  // namespace

absl::StatusOr<LoadedCorpus> ParseCorpus(const json& records,
                                         const LoadOptions& options) {
  if (!records.is_array()) {
    return absl::InvalidArgumentError("corpus must be a JSON array of records");
  }
  LoadedCorpus out;
  out.docs.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    absl::Status status;
    Document doc;
    try {
      if (!records[i].is_object()) {
        throw std::invalid_argument("record is not an object");
      }
      doc = RecordToDocument(records[i], options.expect_gold);
      status = ValidateDocument(doc, options.registry);
    } catch (const std::exception& e) {
      status = absl::InvalidArgumentError(
          absl::StrCat("record ", i, ": schema error: ", e.what()));
    }
    if (!status.ok()) {
      if (!options.permissive) return status;
      ++out.dropped;
      out.drop_reasons.emplace_back(status.message());
      continue;
    }
    out.docs.push_back(std::move(doc));
  }
  return out;
}

absl::StatusOr<LoadedCorpus> LoadCorpus(const std::string& path,
                                        const LoadOptions& options) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<json> j = ParseJsonText(*text, path);
  if (!j.ok()) return j.status();
  absl::StatusOr<LoadedCorpus> c = ParseCorpus(*j, options);
  if (!c.ok()) {
    return absl::Status(c.status().code(),
                        absl::StrCat(path, ": ", c.status().message()));
  }
  return c;
}

json DocumentToJson(const Document& doc) {
  json vertex_set = json::array();
  for (const Entity& e : doc.entities) {
    json ms = json::array();
    for (const Mention& m : e.mentions) {
      ms.push_back({{"name", m.name},
                    {"sent_id", m.sent_id},
                    {"pos", {m.start, m.end}},
                    {"type", m.type}});
    }
    vertex_set.push_back(std::move(ms));
  }
  json labels = json::array();
  for (const GoldTriple& g : doc.gold) {
    labels.push_back(
        {{"h", g.h}, {"t", g.t}, {"r", g.r}, {"evidence", g.evidence}});
  }
  return {{"title", doc.title},
          {"sents", doc.sents},
          {"vertexSet", std::move(vertex_set)},
          {"labels", std::move(labels)}};
}

json CorpusToJson(std::span<const Document> docs) {
  json arr = json::array();
  for (const Document& d : docs) arr.push_back(DocumentToJson(d));
  return arr;
}

std::vector<std::pair<int, int>> CandidatePairs(const Document& doc) {
  const int n = static_cast<int>(doc.entities.size());
  std::vector<std::pair<int, int>> pairs;
  if (n < 2) return pairs;
  pairs.reserve(static_cast<size_t>(n) * (n - 1));
  for (int h = 0; h < n; ++h) {
    for (int t = 0; t < n; ++t) {
      if (h != t) pairs.emplace_back(h, t);
    }
  }
  return pairs;
}

absl::StatusOr<CorpusStats> ComputeCorpusStats(std::span<const Document> docs) {
  if (docs.empty()) {
    return absl::InvalidArgumentError("corpus statistics need at least one document");
  }
  size_t ents = 0, sents = 0, triples = 0;
  for (const Document& d : docs) {
    ents += d.entities.size();
    sents += d.sents.size();
    triples += d.gold.size();
  }
  const double n = static_cast<double>(docs.size());
  return CorpusStats{docs.size(), ents / n, sents / n, triples / n};
}

}  // namespace relprior
