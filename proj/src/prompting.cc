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

#include "relprior/prompting.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "relprior/assets.h"
#include "string_bridge.h"

namespace relprior {

std::string_view TaskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kEpf: return "epf";
    case TaskKind::kRc: return "rc";
    case TaskKind::kHead: return "head";
    case TaskKind::kTail: return "tail";
  }
  return "unknown";
}

absl::StatusOr<TaskKind> ParseTaskKind(std::string_view name) {
  for (TaskKind k : {TaskKind::kEpf, TaskKind::kRc, TaskKind::kHead,
                     TaskKind::kTail}) {
    if (TaskKindName(k) == name) return k;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown task kind '", Sv(name), "' (expected epf|rc|head|tail)"));
}

absl::StatusOr<PromptTemplate> PromptTemplate::FromAsset(TaskKind kind,
                                                         std::string_view text) {
  constexpr std::string_view kMarker = "\n@input\n";
  size_t pos = text.find(kMarker);
  if (pos == std::string_view::npos) {
    return absl::InvalidArgumentError(absl::StrCat(
        Sv(TaskKindName(kind)), " template: missing '@input' separator line"));
  }
  PromptTemplate t;
  t.kind = kind;
  t.instruction = std::string(text.substr(0, pos));
  std::string_view input = text.substr(pos + kMarker.size());
  while (!input.empty() && (input.back() == '\n' || input.back() == '\r')) {
    input.remove_suffix(1);
  }
  t.input = std::string(input);
  return t;
}

namespace {

bool IsPlaceholderChar(char c) {
  return (c >= 'a' && c <= 'z') || c == '_';
}

// Walks `body`, calling on_text for literal runs and on_name for each
// placeholder.
template <typename TextFn, typename NameFn>
absl::Status ScanTemplate(std::string_view body, TextFn on_text,
                          NameFn on_name) {
  size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c == '{') {
      if (i + 1 < body.size() && body[i + 1] == '{') {
        on_text("{");
        i += 2;
        continue;
      }
      size_t close = body.find('}', i + 1);
      if (close == std::string_view::npos) {
        return absl::InvalidArgumentError(
            absl::StrCat("unterminated placeholder at offset ", i));
      }
      std::string_view name = body.substr(i + 1, close - i - 1);
      if (name.empty() ||
          !std::all_of(name.begin(), name.end(), IsPlaceholderChar)) {
        return absl::InvalidArgumentError(
            absl::StrCat("malformed placeholder '{", Sv(name), "}' at offset ", i));
      }
      if (absl::Status s = on_name(name); !s.ok()) return s;
      i = close + 1;
    } else if (c == '}') {
      if (i + 1 < body.size() && body[i + 1] == '}') {
        on_text("}");
        i += 2;
        continue;
      }
      return absl::InvalidArgumentError(
          absl::StrCat("stray '}' at offset ", i));
    } else {
      size_t next = body.find_first_of("{}", i);
      if (next == std::string_view::npos) next = body.size();
      on_text(body.substr(i, next - i));
      i = next;
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<std::string> RenderTemplate(
    std::string_view body, const std::map<std::string, std::string>& bindings) {
  std::string out;
  absl::Status s = ScanTemplate(
      body, [&out](std::string_view text) { out.append(text); },
      [&](std::string_view name) {
        auto it = bindings.find(std::string(name));
        if (it == bindings.end()) {
          return absl::InvalidArgumentError(
              absl::StrCat("placeholder {", Sv(name), "} is not bound"));
        }
        out += it->second;
        return absl::OkStatus();
      });
  if (!s.ok()) return s;
  return out;
}

absl::StatusOr<std::vector<std::string>> Placeholders(std::string_view body) {
  std::vector<std::string> names;
  absl::Status s = ScanTemplate(
      body, [](std::string_view) {},
      [&names](std::string_view name) {
        if (std::find(names.begin(), names.end(), name) == names.end()) {
          names.emplace_back(name);
        }
        return absl::OkStatus();
      });
  if (!s.ok()) return s;
  return names;
}

// ---------------------------------------------------------------------------
// TemplateSet

namespace {

std::string_view AssetFileName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kEpf: return "epf.txt";
    case TaskKind::kRc: return "rc.txt";
    case TaskKind::kHead: return "head.txt";
    case TaskKind::kTail: return "tail.txt";
  }
  return "";
}

std::string_view BuiltinAsset(TaskKind kind) {
  switch (kind) {
    case TaskKind::kEpf: return assets::EpfTemplate();
    case TaskKind::kRc: return assets::RcTemplate();
    case TaskKind::kHead: return assets::HeadTemplate();
    case TaskKind::kTail: return assets::TailTemplate();
  }
  return "";
}

constexpr TaskKind kAllKinds[] = {TaskKind::kEpf, TaskKind::kRc,
                                  TaskKind::kHead, TaskKind::kTail};

}  // namespace

TemplateSet TemplateSet::Defaults() {
  TemplateSet set;
  for (TaskKind k : kAllKinds) {
    // Built-in assets are checked by the unit tests; a failure here is a
    // packaging bug.
    set.Set(PromptTemplate::FromAsset(k, BuiltinAsset(k)).value());
  }
  return set;
}

absl::StatusOr<TemplateSet> TemplateSet::LoadOverrides(const std::string& dir) {
  TemplateSet set = Defaults();
  for (TaskKind k : kAllKinds) {
    std::filesystem::path p = std::filesystem::path(dir) / AssetFileName(k);
    if (!std::filesystem::exists(p)) continue;
    std::ifstream in(p, std::ios::binary);
    if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", p.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    absl::StatusOr<PromptTemplate> t = PromptTemplate::FromAsset(k, buf.str());
    if (!t.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(p.string(), ": ", t.status().message()));
    }
    for (const std::string* body : {&t->instruction, &t->input}) {
      if (absl::StatusOr<std::vector<std::string>> names = Placeholders(*body);
          !names.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat(p.string(), ": ", names.status().message()));
      }
    }
    set.Set(*std::move(t));
  }
  return set;
}

const PromptTemplate& TemplateSet::Get(TaskKind kind) const {
  return templates_.at(kind);
}

void TemplateSet::Set(PromptTemplate t) {
  TaskKind k = t.kind;
  templates_[k] = std::move(t);
}

// ---------------------------------------------------------------------------
// Line formats

std::string FormatPairLine(std::string_view head, std::string_view tail) {
  return absl::StrCat("(", Sv(head), ", ", Sv(tail), ")");
}

std::string FormatEpfLine(std::string_view head, std::string_view tail) {
  return absl::StrCat("(", Sv(head), ", 1, ", Sv(tail), ")");
}

std::string FormatTripleLine(std::string_view head, std::string_view relation,
                             std::string_view tail) {
  return absl::StrCat("(", Sv(head), ", ", Sv(relation), ", ", Sv(tail), ")");
}

std::string FormatHeadLine(std::string_view entity, std::string_view relation) {
  return absl::StrCat("(", Sv(entity), ", ", Sv(relation), ")");
}

std::string FormatTailLine(std::string_view relation, std::string_view entity) {
  return absl::StrCat("(", Sv(relation), ", ", Sv(entity), ")");
}

std::string EntityListText(const Document& doc, std::span<const int> subset) {
  std::vector<absl::string_view> names;
  if (subset.empty()) {
    for (const Entity& e : doc.entities) names.push_back(Sv(RepresentativeName(e)));
  } else {
    for (int i : subset) names.push_back(Sv(RepresentativeName(doc.entities.at(i))));
  }
  return absl::StrJoin(names, "; ");
}

std::string RelationSetText(const RelationRegistry& registry) {
  return absl::StrJoin(registry.entries(), "; ",
                       [](std::string* out, const RelationId& r) {
                         out->append(r.name);
                       });
}

absl::StatusOr<std::vector<std::string>> CanonicalRelationSet(
    const RelationRegistry& registry, std::span<const std::string> codes) {
  std::set<size_t> positions;
  for (const std::string& c : codes) {
    std::optional<size_t> idx = registry.IndexOf(c);
    if (!idx.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("relation ", c, " is not in the registry"));
    }
    positions.insert(*idx);
  }
  std::vector<std::string> out;
  out.reserve(positions.size());
  for (size_t p : positions) out.push_back(registry.entries()[p].code);
  return out;
}

// ---------------------------------------------------------------------------
// PromptRenderer

absl::StatusOr<RenderedPrompt> PromptRenderer::Render(
    TaskKind kind, const std::map<std::string, std::string>& bindings) const {
  const PromptTemplate& t = templates_.Get(kind);
  absl::StatusOr<std::string> instruction = RenderTemplate(t.instruction, bindings);
  if (!instruction.ok()) return instruction.status();
  absl::StatusOr<std::string> input = RenderTemplate(t.input, bindings);
  if (!input.ok()) return input.status();
  return RenderedPrompt{*std::move(instruction), *std::move(input)};
}

absl::StatusOr<std::string> PromptRenderer::PairLines(
    const Document& doc, std::span<const std::pair<int, int>> pairs) const {
  const int n = static_cast<int>(doc.entities.size());
  std::vector<std::string> lines;
  lines.reserve(pairs.size());
  for (const auto& [h, t] : pairs) {
    if (h < 0 || h >= n || t < 0 || t >= n) {
      return absl::OutOfRangeError(absl::StrCat(
          "document '", doc.title, "': pair (", h, ", ", t,
          ") out of bounds for ", n, " entities"));
    }
    lines.push_back(FormatPairLine(RepresentativeName(doc.entities[h]),
                                   RepresentativeName(doc.entities[t])));
  }
  return absl::StrJoin(lines, "\n");
}

absl::StatusOr<RenderedPrompt> PromptRenderer::RenderEpf(
    const Document& doc, std::span<const int> subset) const {
  for (int i : subset) {
    if (i < 0 || i >= static_cast<int>(doc.entities.size())) {
      return absl::OutOfRangeError(
          absl::StrCat("document '", doc.title, "': entity ", i, " out of bounds"));
    }
  }
  return Render(TaskKind::kEpf, {{"text", DocumentText(doc)},
                                 {"relation_set", RelationSetText(*registry_)},
                                 {"entities", EntityListText(doc, subset)}});
}

absl::StatusOr<RenderedPrompt> PromptRenderer::RenderEpfPairs(
    const Document& doc, std::span<const std::pair<int, int>> pairs) const {
  absl::StatusOr<std::string> lines = PairLines(doc, pairs);
  if (!lines.ok()) return lines.status();
  return Render(TaskKind::kEpf, {{"text", DocumentText(doc)},
                                 {"relation_set", RelationSetText(*registry_)},
                                 {"entities", *lines},
                                 {"pairs", *lines}});
}

absl::StatusOr<RenderedPrompt> PromptRenderer::RenderRc(
    const Document& doc, std::span<const std::pair<int, int>> pairs) const {
  absl::StatusOr<std::string> lines = PairLines(doc, pairs);
  if (!lines.ok()) return lines.status();
  return Render(TaskKind::kRc, {{"text", DocumentText(doc)},
                                {"relation_set", RelationSetText(*registry_)},
                                {"pairs", *lines}});
}

absl::StatusOr<RenderedPrompt> PromptRenderer::RenderMatching(
    TaskKind kind, const Document& doc,
    std::span<const std::string> relation_codes) const {
  absl::StatusOr<std::vector<std::string>> codes =
      CanonicalRelationSet(*registry_, relation_codes);
  if (!codes.ok()) return codes.status();
  std::vector<absl::string_view> names;
  for (const std::string& c : *codes) names.push_back(Sv(registry_->NameOf(c)));
  return Render(kind, {{"text", DocumentText(doc)},
                       {"relations", absl::StrJoin(names, "; ")},
                       {"relation_set", RelationSetText(*registry_)},
                       {"entities", EntityListText(doc)}});
}

absl::StatusOr<RenderedPrompt> PromptRenderer::RenderHead(
    const Document& doc, std::span<const std::string> relation_codes) const {
  return RenderMatching(TaskKind::kHead, doc, relation_codes);
}

absl::StatusOr<RenderedPrompt> PromptRenderer::RenderTail(
    const Document& doc, std::span<const std::string> relation_codes) const {
  return RenderMatching(TaskKind::kTail, doc, relation_codes);
}

}  // namespace relprior
