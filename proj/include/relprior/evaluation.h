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

#ifndef RELPRIOR_EVALUATION_H_
#define RELPRIOR_EVALUATION_H_

// DocRED scoring: micro P/R/F1, Ign F1 against annotated training facts,
// per-relation breakdown, and stage-count reports. All x/0 ratios are 0.

#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "relprior/corpus.h"
#include "relprior/pipeline.h"
#include "relprior/predictions.h"

namespace relprior {

double SafeRatio(double num, double den);
double HarmonicMean(double p, double r);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t predicted = 0;
  size_t correct = 0;
  size_t gold = 0;
};

struct IgnMetrics {
  Metrics base;
  size_t correct_in_train = 0;
  double ign_precision = 0.0;
  double ign_recall = 0.0;  // always base.recall
  double ign_f1 = 0.0;
};

// (head mention name, tail mention name, relation code), names case-folded.
using TrainFactSet = std::set<std::tuple<std::string, std::string, std::string>>;

// A prediction is correct iff (title, h, t, r) is a gold fact. Duplicate
// predictions count once. Unknown titles or out-of-range indices are an
// error listing the offenders; so is a gold corpus with no labels at all.
absl::StatusOr<Metrics> Score(std::span<const Prediction> predictions,
                              std::span<const Document> gold_docs);

// Every gold triple of `train_docs`, expanded over the cross product of its
// head and tail mention names.
TrainFactSet BuildTrainFactSet(std::span<const Document> train_docs);

absl::StatusOr<IgnMetrics> IgnScore(std::span<const Prediction> predictions,
                                    std::span<const Document> gold_docs,
                                    const TrainFactSet& train_facts);

struct RelationScore {
  std::string code;
  std::string name;  // empty without a registry
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t predicted = 0;
  size_t correct = 0;
  size_t support = 0;  // gold count
};

// One row per relation seen in gold or predictions, F1 descending (ties by
// code).
absl::StatusOr<std::vector<RelationScore>> PerRelationF1(
    std::span<const Prediction> predictions, std::span<const Document> gold_docs,
    const RelationRegistry* registry = nullptr);

nlohmann::json MetricsToJson(const IgnMetrics& m);
std::string PerRelationCsv(std::span<const RelationScore> rows);

struct StageReport {
  size_t documents = 0;
  size_t incomplete = 0;
  StageCounts totals;
  GroundingDiagnostics diagnostics;

  std::string ToText() const;
  std::string ToCsv() const;
};

StageReport BuildStageReport(std::span<const DocumentResult> results);

// Reads a results.jsonl written by Pipeline::RunCorpus.
absl::StatusOr<std::vector<DocumentResult>> ReadDocumentResults(
    const std::string& path);

}  // namespace relprior

#endif  // RELPRIOR_EVALUATION_H_
