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

#ifndef RELPRIOR_PROMPTING_H_
#define RELPRIOR_PROMPTING_H_

// Rendering of the four task prompts: entity-pair filtering (EPF), relation
// classification (RC), and head/tail matching for a relation prior.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "relprior/corpus.h"

namespace relprior {

enum class TaskKind { kEpf, kRc, kHead, kTail };

std::string_view TaskKindName(TaskKind kind);  // "epf", "rc", "head", "tail"
absl::StatusOr<TaskKind> ParseTaskKind(std::string_view name);

// A template is an instruction part and an input part, both with {name}
// placeholders. `{{` and `}}` are literal braces.
struct PromptTemplate {
  TaskKind kind = TaskKind::kEpf;
  std::string instruction;
  std::string input;

  // Parses the asset format: instruction text, a line "@input", input text.
  static absl::StatusOr<PromptTemplate> FromAsset(TaskKind kind,
                                                  std::string_view text);
};

// Substitutes every {name}. Unbound or malformed placeholders are errors.
absl::StatusOr<std::string> RenderTemplate(
    std::string_view body, const std::map<std::string, std::string>& bindings);

// Placeholder names used by `body`, in order of first appearance.
absl::StatusOr<std::vector<std::string>> Placeholders(std::string_view body);

struct RenderedPrompt {
  std::string instruction;
  std::string input;

  std::string Full() const { return instruction + "\n" + input; }
};

class TemplateSet {
 public:
  // The templates shipped with the library.
  static TemplateSet Defaults();
  // Defaults, with any of epf.txt / rc.txt / head.txt / tail.txt found in
  // `dir` replacing the matching built-in.
  static absl::StatusOr<TemplateSet> LoadOverrides(const std::string& dir);

  const PromptTemplate& Get(TaskKind kind) const;
  void Set(PromptTemplate t);

 private:
  std::map<TaskKind, PromptTemplate> templates_;
};

// Formatting shared by prompts, fine-tuning targets and the oracle backend.
std::string FormatPairLine(std::string_view head, std::string_view tail);
std::string FormatEpfLine(std::string_view head, std::string_view tail);
std::string FormatTripleLine(std::string_view head, std::string_view relation,
                             std::string_view tail);
std::string FormatHeadLine(std::string_view entity, std::string_view relation);
std::string FormatTailLine(std::string_view relation, std::string_view entity);

// Entity names of `doc` (representative name each, document order) joined
// with "; ". When `subset` is non-empty only those entities are listed.
std::string EntityListText(const Document& doc,
                           std::span<const int> subset = {});
std::string RelationSetText(const RelationRegistry& registry);

class PromptRenderer {
 public:
  PromptRenderer(const RelationRegistry* registry, TemplateSet templates)
      : registry_(registry), templates_(std::move(templates)) {}

  // EPF over the entity set (or a subset of it).
  absl::StatusOr<RenderedPrompt> RenderEpf(const Document& doc,
                                           std::span<const int> subset = {}) const;
  // EPF with the input block listing explicit "(head, tail)" pairs instead
  // of the entity set.
  absl::StatusOr<RenderedPrompt> RenderEpfPairs(
      const Document& doc, std::span<const std::pair<int, int>> pairs) const;
  absl::StatusOr<RenderedPrompt> RenderRc(
      const Document& doc, std::span<const std::pair<int, int>> pairs) const;
  // `relation_codes` is deduplicated and put in registry order.
  absl::StatusOr<RenderedPrompt> RenderHead(
      const Document& doc, std::span<const std::string> relation_codes) const;
  absl::StatusOr<RenderedPrompt> RenderTail(
      const Document& doc, std::span<const std::string> relation_codes) const;

  const RelationRegistry& registry() const { return *registry_; }

 private:
  absl::StatusOr<RenderedPrompt> Render(
      TaskKind kind, const std::map<std::string, std::string>& bindings) const;
  absl::StatusOr<RenderedPrompt> RenderMatching(
      TaskKind kind, const Document& doc,
      std::span<const std::string> relation_codes) const;
  absl::StatusOr<std::string> PairLines(
      const Document& doc, std::span<const std::pair<int, int>> pairs) const;

  const RelationRegistry* registry_;
  TemplateSet templates_;
};

// Codes deduplicated and sorted into registry order. Unknown codes are an
// error.
absl::StatusOr<std::vector<std::string>> CanonicalRelationSet(
    const RelationRegistry& registry, std::span<const std::string> codes);

}  // namespace relprior

#endif  // RELPRIOR_PROMPTING_H_
