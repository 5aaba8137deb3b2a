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

#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "relprior/backend.h"
#include "relprior/random.h"
#include "string_bridge.h"

namespace relprior {

namespace {

// Out-of-registry labels close in meaning to each DocRED relation. None of
// them is a registry name; relations missing here get a generic fallback.
const std::map<std::string, std::string>& CorruptionTable() {
  static const auto* table = new std::map<std::string, std::string>{
      {"P6", "government head"},
      {"P17", "nation"},
      {"P19", "birthplace"},
      {"P20", "deathplace"},
      {"P22", "dad"},
      {"P25", "mom"},
      {"P26", "married to"},
      {"P27", "nationality"},
      {"P30", "located on continent"},
      {"P31", "is a"},
      {"P35", "state leader"},
      {"P36", "capital city"},
      {"P37", "language"},
      {"P39", "position"},
      {"P40", "son or daughter"},
      {"P50", "written by"},
      {"P54", "plays for"},
      {"P57", "directed by"},
      {"P58", "written for screen by"},
      {"P69", "alma mater"},
      {"P86", "music by"},
      {"P102", "political party"},
      {"P108", "works for"},
      {"P112", "founder"},
      {"P118", "plays in league"},
      {"P123", "published by"},
      {"P127", "owner"},
      {"P131", "located in"},
      {"P136", "style"},
      {"P137", "operated by"},
      {"P140", "faith"},
      {"P150", "contains"},
      {"P155", "preceded by"},
      {"P156", "succeeded by"},
      {"P159", "headquarters"},
      {"P161", "actor"},
      {"P162", "produced by"},
      {"P166", "award"},
      {"P170", "created by"},
      {"P171", "parent species"},
      {"P172", "ethnicity"},
      {"P175", "performed by"},
      {"P176", "made by"},
      {"P178", "developed by"},
      {"P179", "part of series"},
      {"P190", "twin town"},
      {"P194", "legislature"},
      {"P205", "basin countries"},
      {"P206", "next to water"},
      {"P241", "branch of service"},
      {"P264", "label"},
      {"P272", "studio"},
      {"P276", "place"},
      {"P279", "type of"},
      {"P355", "subsidiary company"},
      {"P361", "belongs to"},
      {"P364", "original language"},
      {"P400", "runs on"},
      {"P403", "flows into"},
      {"P449", "broadcast on"},
      {"P463", "membership"},
      {"P488", "chairman"},
      {"P495", "origin country"},
      {"P527", "includes"},
      {"P551", "lives in"},
      {"P569", "birth date"},
      {"P570", "death date"},
      {"P571", "founded"},
      {"P576", "dissolved"},
      {"P577", "release date"},
      {"P580", "started"},
      {"P582", "ended"},
      {"P585", "date"},
      {"P607", "war"},
      {"P674", "character"},
      {"P676", "lyricist"},
      {"P706", "on terrain"},
      {"P710", "participants"},
      {"P737", "inspired by"},
      {"P740", "formed in"},
      {"P749", "parent company"},
      {"P800", "known for"},
      {"P807", "split from"},
      {"P840", "set in"},
      {"P937", "works in"},
      {"P1001", "jurisdiction"},
      {"P1056", "produces"},
      {"P1198", "jobless rate"},
      {"P1336", "claimed by"},
      {"P1344", "took part in"},
      {"P1365", "replaced"},
      {"P1366", "successor"},
      {"P1376", "is capital of"},
      {"P1412", "speaks"},
      {"P1441", "appears in"},
      {"P3373", "brother or sister"},
  };
  return *table;
}

}  // namespace

std::string CorruptedLabel(const RelationRegistry& registry,
                           std::string_view code) {
  const auto& table = CorruptionTable();
  if (auto it = table.find(std::string(code)); it != table.end()) {
    if (registry.FindByName(it->second) == nullptr) return it->second;
  }
  std::string label = absl::StrCat("related by ", registry.NameOf(code));
  while (registry.FindByName(label) != nullptr) label += " (approx.)";
  return label;
}

std::map<std::string, std::string> CorruptionAliasTable(
    const RelationRegistry& registry) {
  std::map<std::string, std::string> out;
  for (const RelationId& r : registry.entries()) {
    out[CorruptedLabel(registry, r.code)] = r.code;
  }
  return out;
}

absl::Status NoiseConfig::Validate() const {
  auto check = [](double v, std::string_view name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat(Sv(name), " ", v, " outside [0, 1]"));
    }
    return absl::OkStatus();
  };
  if (absl::Status s = check(omission_rate, "omission_rate"); !s.ok()) return s;
  if (absl::Status s = check(spurious_rate, "spurious_rate"); !s.ok()) return s;
  return check(label_corruption_rate, "label_corruption_rate");
}

OracleBackend::OracleBackend(std::span<const Document> corpus,
                             const RelationRegistry* registry, NoiseConfig noise)
    : corpus_(corpus), registry_(registry), noise_(noise) {
  for (size_t i = 0; i < corpus_.size(); ++i) {
    by_title_.emplace(corpus_[i].title, i);
  }
}

absl::StatusOr<std::unique_ptr<OracleBackend>> OracleBackend::Create(
    std::span<const Document> corpus, const RelationRegistry* registry,
    NoiseConfig noise) {
  if (absl::Status s = noise.Validate(); !s.ok()) return s;
  for (const Document& d : corpus) {
    if (absl::Status s = ValidateDocument(d, registry); !s.ok()) return s;
  }
  return std::unique_ptr<OracleBackend>(new OracleBackend(corpus, registry, noise));
}

namespace {

std::string PayloadSalt(const TaskContext& ctx) {
  std::string salt = absl::StrCat(ctx.doc_title, "\x1f", Sv(TaskKindName(ctx.kind)));
  for (const EntityPair& p : ctx.pairs) {
    absl::StrAppend(&salt, "\x1f", p.head, ",", p.tail);
  }
  for (const std::string& r : ctx.relations) absl::StrAppend(&salt, "\x1f", r);
  return salt;
}

}  // namespace

absl::StatusOr<std::string> OracleBackend::Generate(
    const CompletionRequest& request) {
  if (absl::Status s = request.Validate(); !s.ok()) return s;
  const TaskContext& ctx = request.context;
  auto it = by_title_.find(ctx.doc_title);
  if (it == by_title_.end()) {
    return absl::FailedPreconditionError(
        absl::StrCat("oracle has no document titled '", ctx.doc_title, "'"));
  }
  const Document& doc = corpus_[it->second];
  const int n = static_cast<int>(doc.entities.size());
  for (const EntityPair& p : ctx.pairs) {
    if (p.head >= n || p.tail >= n) {
      return absl::OutOfRangeError(absl::StrCat(
          "pair (", p.head, ", ", p.tail, ") out of bounds in '", doc.title, "'"));
    }
  }
  for (const std::string& r : ctx.relations) {
    if (registry_->FindByCode(r) == nullptr) {
      return absl::InvalidArgumentError(
          absl::StrCat("relation ", r, " not in registry"));
    }
  }

  StableRng rng(MixSeed(noise_.seed, PayloadSalt(ctx)));
  auto name = [&doc](int e) -> const std::string& {
    return RepresentativeName(doc.entities[e]);
  };
  auto label = [&](const std::string& code) {
    if (rng.Bernoulli(noise_.label_corruption_rate)) {
      return CorruptedLabel(*registry_, code);
    }
    return registry_->NameOf(code);
  };

  std::vector<std::string> lines;
  switch (ctx.kind) {
    case TaskKind::kEpf: {
      std::set<EntityPair> gold;
      for (const GoldTriple& g : doc.gold) gold.insert({g.h, g.t});
      for (const EntityPair& p : ctx.pairs) {
        if (gold.count(p) > 0) {
          if (!rng.Bernoulli(noise_.omission_rate)) {
            lines.push_back(FormatEpfLine(name(p.head), name(p.tail)));
          }
        } else if (rng.Bernoulli(noise_.spurious_rate)) {
          lines.push_back(FormatEpfLine(name(p.head), name(p.tail)));
        }
      }
      break;
    }
    case TaskKind::kRc: {
      for (const EntityPair& p : ctx.pairs) {
        std::set<std::string> seen;
        for (const GoldTriple& g : doc.gold) {
          if (g.h != p.head || g.t != p.tail || !seen.insert(g.r).second) continue;
          if (rng.Bernoulli(noise_.omission_rate)) continue;
          lines.push_back(FormatTripleLine(name(g.h), label(g.r), name(g.t)));
        }
        if (seen.empty() && rng.Bernoulli(noise_.spurious_rate)) {
          const RelationId& r =
              registry_->entries()[rng.Below(registry_->size())];
          lines.push_back(FormatTripleLine(name(p.head), r.name, name(p.tail)));
        }
      }
      break;
    }
    case TaskKind::kHead:
    case TaskKind::kTail: {
      const bool head = ctx.kind == TaskKind::kHead;
      for (const std::string& code : ctx.relations) {
        std::set<int> gold_entities;
        std::vector<int> ordered;
        for (const GoldTriple& g : doc.gold) {
          if (g.r != code) continue;
          int e = head ? g.h : g.t;
          if (gold_entities.insert(e).second) ordered.push_back(e);
        }
        auto emit = [&](int e, const std::string& rel_label) {
          lines.push_back(head ? FormatHeadLine(name(e), rel_label)
                               : FormatTailLine(rel_label, name(e)));
        };
        for (int e : ordered) {
          if (rng.Bernoulli(noise_.omission_rate)) continue;
          emit(e, label(code));
        }
        for (int e = 0; e < n; ++e) {
          if (gold_entities.count(e) == 0 && rng.Bernoulli(noise_.spurious_rate)) {
            emit(e, registry_->NameOf(code));
          }
        }
      }
      break;
    }
  }
  return absl::StrJoin(lines, "\n");
}

}  // namespace relprior
