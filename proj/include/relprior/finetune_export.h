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

#ifndef RELPRIOR_FINETUNE_EXPORT_H_
#define RELPRIOR_FINETUNE_EXPORT_H_

// Instruction-format fine-tuning datasets for the four tasks. Targets use
// exactly the tuple grammar the parsers accept, so every record's output
// parses back to the gold projection of its document.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "relprior/corpus.h"
#include "relprior/prompting.h"

namespace relprior {

struct InstructionRecord {
  std::string instruction;
  std::string input;
  std::string output;
  // Source document; not serialized.
  std::string title;

  friend bool operator==(const InstructionRecord&,
                         const InstructionRecord&) = default;
};

enum class SamplingMode {
  kDocument,  // one record per document listing positives and negatives
  kPerPair,   // one record per listed pair, target "(h, 1, t)" or "(h, 0, t)"
};
absl::StatusOr<SamplingMode> ParseSamplingMode(std::string_view name);
std::string_view SamplingModeName(SamplingMode mode);

struct SamplingConfig {
  double neg_ratio = 1.0;  // negatives per positive
  uint64_t seed = 13;
  SamplingMode mode = SamplingMode::kDocument;

  absl::Status Validate() const;
};

struct ExportDiagnostics {
  size_t no_entities = 0;    // skipped
  size_t no_triples = 0;     // skipped
  size_t short_negatives = 0;  // fewer unrelated pairs than requested
};

struct ExportResult {
  std::vector<InstructionRecord> records;
  ExportDiagnostics diag;
};

// Ordered pairs (h, t) with at least one gold relation, lexicographic.
std::vector<std::pair<int, int>> GoldPairs(const Document& doc);

// The pair list used for one document in document mode: every gold pair
// plus floor(neg_ratio * positives) unrelated pairs, shuffled. Deterministic
// in (seed, title).
std::vector<std::pair<int, int>> SampleEpfPairs(const Document& doc,
                                                const SamplingConfig& cfg,
                                                bool* short_negatives = nullptr);

absl::StatusOr<ExportResult> BuildEpfDataset(std::span<const Document> docs,
                                             const PromptRenderer& renderer,
                                             const SamplingConfig& cfg);
absl::StatusOr<ExportResult> BuildRcDataset(std::span<const Document> docs,
                                            const PromptRenderer& renderer);
absl::StatusOr<ExportResult> BuildHeadDataset(std::span<const Document> docs,
                                              const PromptRenderer& renderer);
absl::StatusOr<ExportResult> BuildTailDataset(std::span<const Document> docs,
                                              const PromptRenderer& renderer);

std::string SerializeJsonl(std::span<const InstructionRecord> records);
absl::Status WriteJsonl(std::span<const InstructionRecord> records,
                        const std::string& path);

}  // namespace relprior

#endif  // RELPRIOR_FINETUNE_EXPORT_H_
