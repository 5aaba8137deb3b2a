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

#ifndef RELPRIOR_PIPELINE_H_
#define RELPRIOR_PIPELINE_H_

// Per-document stage sequence:
//
//   EPF   which ordered entity pairs are related at all
//   RC    relation labels for the EPF-approved pairs      -> stage EPF triples
//   RM    head and tail candidates for the predicted relations, joined on
//         equal relation                                  -> stage RM triples
//   fuse  EPF triples first, then RM triples not already present

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "relprior/backend.h"
#include "relprior/corpus.h"
#include "relprior/parsing.h"
#include "relprior/predictions.h"
#include "relprior/prompting.h"

namespace relprior {

enum class Stage { kEpf, kRm };
std::string_view StageName(Stage stage);

enum class FusionMode {
  kUnion,   // every RM triple not already produced by EPF/RC
  kStrict,  // additionally drop RM triples on pairs EPF did not approve
};
absl::StatusOr<FusionMode> ParseFusionMode(std::string_view name);
std::string_view FusionModeName(FusionMode mode);

struct PredictedTriple {
  std::string title;
  int h = 0;
  int t = 0;
  std::string r;
  Stage stage = Stage::kEpf;

  friend bool operator==(const PredictedTriple&, const PredictedTriple&) = default;
};

struct PairJudgment {
  int h = 0;
  int t = 0;
  bool related = false;
};

struct StageCounts {
  size_t epf_pairs = 0;
  size_t epf_triples = 0;
  size_t head_candidates = 0;
  size_t tail_candidates = 0;
  size_t rm_triples = 0;
  size_t rm_added = 0;  // fused triples with RM provenance
  size_t fused = 0;
  size_t rc_off_pair_dropped = 0;  // RC triples on pairs EPF did not approve
  size_t backend_calls = 0;

  StageCounts& operator+=(const StageCounts& o);
};

struct DocumentResult {
  std::string title;
  std::vector<EntityPair> epf_pairs;
  std::vector<PredictedTriple> epf_triples;
  std::vector<PredictedTriple> rm_triples;
  std::vector<PredictedTriple> fused_triples;
  StageCounts counts;
  GroundingDiagnostics diagnostics;
  bool complete = true;
  std::vector<std::string> errors;
  // Worst backend status seen; OK when every call succeeded.
  absl::StatusCode failure = absl::StatusCode::kOk;
};

nlohmann::json DocumentResultToJson(const DocumentResult& result);
absl::StatusOr<DocumentResult> DocumentResultFromJson(const nlohmann::json& j);

struct PipelineConfig {
  DecodingParams decoding;
  // Per-stage overrides of `decoding`.
  std::map<TaskKind, DecodingParams> stage_decoding;
  FusionMode fusion = FusionMode::kUnion;
  // Approximate token budget (bytes / 4) for one EPF prompt; 0 = unlimited.
  // Over budget, entities are partitioned into chunks judged separately.
  size_t epf_token_budget = 0;
  // 1 = pairs within chunks only; 2 = also pairs across chunks.
  int epf_passes = 2;
  // List every ordered pair in the EPF input instead of the entity set.
  bool epf_enumerate_pairs = false;
  // One head and one tail call per relation instead of one each overall.
  bool rm_per_relation = false;
  bool enable_rm = true;
  int max_concurrency = 4;
  // Stop after this many documents without writing outputs (0 = no limit).
  size_t stop_after = 0;

  absl::Status Validate() const;
  DecodingParams DecodingFor(TaskKind kind) const;
};

// R' = {(h, r, t) : (h, r) in heads, (r, t) in tails, h != t}, in head order
// then tail order, duplicates removed.
std::vector<PredictedTriple> MergeHeadTail(const std::string& title,
                                           std::span<const HeadCandidate> heads,
                                           std::span<const TailCandidate> tails);

// `epf_pairs` is the set EPF approved; only consulted in strict mode.
std::vector<PredictedTriple> Fuse(std::span<const PredictedTriple> epf,
                                  std::span<const PredictedTriple> rm,
                                  FusionMode mode,
                                  std::span<const EntityPair> epf_pairs);

struct CorpusSummary {
  size_t documents = 0;
  size_t processed = 0;
  size_t incomplete = 0;
  size_t predictions = 0;
  bool interrupted = false;
  StageCounts counts;
  GroundingDiagnostics diagnostics;
  absl::StatusCode worst_failure = absl::StatusCode::kOk;
};

class Pipeline {
 public:
  // `backend` must outlive the pipeline and be safe for concurrent use.
  Pipeline(const RelationRegistry* registry, TemplateSet templates,
           Backend* backend, PipelineConfig config);

  // Related pairs only (all returned judgments have related = true).
  absl::StatusOr<std::vector<PairJudgment>> RunEpf(const Document& doc,
                                                   DocumentResult* acc) const;
  absl::StatusOr<std::vector<PredictedTriple>> RunRc(
      const Document& doc, std::span<const EntityPair> pairs,
      DocumentResult* acc) const;
  absl::StatusOr<std::vector<PredictedTriple>> RunRm(
      const Document& doc, std::span<const std::string> relations,
      DocumentResult* acc) const;

  DocumentResult RunDocument(const Document& doc) const;

  // Processes documents with up to max_concurrency workers. Unless
  // interrupted by stop_after, writes out_dir/predictions.json and
  // out_dir/results.jsonl, both sorted by title.
  absl::StatusOr<CorpusSummary> RunCorpus(std::span<const Document> docs,
                                          const std::string& out_dir) const;

  // In-memory variant; results are in input order.
  std::vector<DocumentResult> RunAll(std::span<const Document> docs) const;

  const PipelineConfig& config() const { return config_; }

 private:
  absl::StatusOr<std::string> Call(const std::string& prompt, TaskContext ctx,
                                   DocumentResult* acc) const;
  absl::StatusOr<std::vector<EntityPair>> EpfChunked(const Document& doc,
                                                     DocumentResult* acc) const;

  const RelationRegistry* registry_;
  PromptRenderer renderer_;
  Backend* backend_;
  PipelineConfig config_;
};

// Fused triples of every result as predictions sorted by (title, h, t, r).
std::vector<Prediction> CollectPredictions(std::span<const DocumentResult> results);

}  // namespace relprior

#endif  // RELPRIOR_PIPELINE_H_
