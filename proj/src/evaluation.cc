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

#include "relprior/evaluation.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"

namespace relprior {

using nlohmann::json;

double SafeRatio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double HarmonicMean(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

namespace {

using Fact = std::tuple<std::string, int, int, std::string>;

struct GoldIndex {
  std::set<Fact> facts;
  // First document per title; DocRED scoring keys on title.
  std::unordered_map<std::string, const Document*> by_title;
};

GoldIndex IndexGold(std::span<const Document> docs) {
  GoldIndex idx;
  for (const Document& d : docs) {
    idx.by_title.emplace(d.title, &d);
    for (const GoldTriple& g : d.gold) idx.facts.emplace(d.title, g.h, g.t, g.r);
  }
  return idx;
}

// Validates and deduplicates predictions.
absl::StatusOr<std::set<Fact>> CheckPredictions(
    std::span<const Prediction> predictions, const GoldIndex& gold) {
  if (gold.facts.empty()) {
    return absl::FailedPreconditionError(
        "gold corpus has no labels; evaluation needs an annotated split");
  }
  std::set<Fact> out;
  std::vector<std::string> offenders;
  size_t n_bad = 0;
  for (const Prediction& p : predictions) {
    auto it = gold.by_title.find(p.title);
    std::string why;
    if (it == gold.by_title.end()) {
      why = "unknown title";
    } else {
      const int n = static_cast<int>(it->second->entities.size());
      if (p.h < 0 || p.h >= n || p.t < 0 || p.t >= n) {
        why = absl::StrCat("index out of range for ", n, " entities");
      }
    }
    if (!why.empty()) {
      if (++n_bad <= 10) {
        offenders.push_back(absl::StrCat("('", p.title, "', ", p.h, ", ", p.t,
                                         ", ", p.r, "): ", why));
      }
      continue;
    }
    out.emplace(p.title, p.h, p.t, p.r);
  }
  if (n_bad > 0) {
    return absl::InvalidArgumentError(
        absl::StrCat(n_bad, " invalid prediction(s): ", absl::StrJoin(offenders, "; "),
                     n_bad > offenders.size() ? "; ..." : ""));
  }
  return out;
}

Metrics MakeMetrics(size_t predicted, size_t correct, size_t gold) {
  Metrics m;
  m.predicted = predicted;
  m.correct = correct;
  m.gold = gold;
  m.precision = SafeRatio(static_cast<double>(correct), static_cast<double>(predicted));
  m.recall = SafeRatio(static_cast<double>(correct), static_cast<double>(gold));
  m.f1 = HarmonicMean(m.precision, m.recall);
  return m;
}

}  // namespace

absl::StatusOr<Metrics> Score(std::span<const Prediction> predictions,
                              std::span<const Document> gold_docs) {
  GoldIndex gold = IndexGold(gold_docs);
  absl::StatusOr<std::set<Fact>> preds = CheckPredictions(predictions, gold);
  if (!preds.ok()) return preds.status();
  size_t correct = 0;
  for (const Fact& f : *preds) correct += gold.facts.count(f);
  return MakeMetrics(preds->size(), correct, gold.facts.size());
}

TrainFactSet BuildTrainFactSet(std::span<const Document> train_docs) {
  TrainFactSet facts;
  for (const Document& d : train_docs) {
    for (const GoldTriple& g : d.gold) {
      for (const Mention& hm : d.entities[g.h].mentions) {
        for (const Mention& tm : d.entities[g.t].mentions) {
          facts.emplace(CaseFold(hm.name), CaseFold(tm.name), g.r);
        }
      }
    }
  }
  return facts;
}

absl::StatusOr<IgnMetrics> IgnScore(std::span<const Prediction> predictions,
                                    std::span<const Document> gold_docs,
                                    const TrainFactSet& train_facts) {
  GoldIndex gold = IndexGold(gold_docs);
  absl::StatusOr<std::set<Fact>> preds = CheckPredictions(predictions, gold);
  if (!preds.ok()) return preds.status();
  IgnMetrics out;
  size_t correct = 0;
  for (const Fact& f : *preds) {
    if (gold.facts.count(f) == 0) continue;
    ++correct;
    const auto& [title, h, t, r] = f;
    const Document& doc = *gold.by_title.at(title);
    bool in_train = false;
    for (const Mention& hm : doc.entities[h].mentions) {
      for (const Mention& tm : doc.entities[t].mentions) {
        if (train_facts.count({CaseFold(hm.name), CaseFold(tm.name), r}) > 0) {
          in_train = true;
          break;
        }
      }
      if (in_train) break;
    }
    if (in_train) ++out.correct_in_train;
  }
  out.base = MakeMetrics(preds->size(), correct, gold.facts.size());
  out.ign_precision =
      SafeRatio(static_cast<double>(correct - out.correct_in_train),
                static_cast<double>(preds->size() - out.correct_in_train));
  out.ign_recall = out.base.recall;
  out.ign_f1 = HarmonicMean(out.ign_precision, out.ign_recall);
  return out;
}

absl::StatusOr<std::vector<RelationScore>> PerRelationF1(
    std::span<const Prediction> predictions, std::span<const Document> gold_docs,
    const RelationRegistry* registry) {
  GoldIndex gold = IndexGold(gold_docs);
  absl::StatusOr<std::set<Fact>> preds = CheckPredictions(predictions, gold);
  if (!preds.ok()) return preds.status();
  std::map<std::string, RelationScore> rows;
  for (const Fact& f : gold.facts) ++rows[std::get<3>(f)].support;
  for (const Fact& f : *preds) {
    RelationScore& row = rows[std::get<3>(f)];
    ++row.predicted;
    if (gold.facts.count(f) > 0) ++row.correct;
  }
  std::vector<RelationScore> out;
  for (auto& [code, row] : rows) {
    row.code = code;
    if (registry != nullptr) {
      if (const RelationId* r = registry->FindByCode(code)) row.name = r->name;
    }
    row.precision = SafeRatio(static_cast<double>(row.correct),
                              static_cast<double>(row.predicted));
    row.recall = SafeRatio(static_cast<double>(row.correct),
                           static_cast<double>(row.support));
    row.f1 = HarmonicMean(row.precision, row.recall);
    out.push_back(row);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RelationScore& a, const RelationScore& b) {
                     if (a.f1 != b.f1) return a.f1 > b.f1;
                     if (a.code.size() != b.code.size()) {
                       return a.code.size() < b.code.size();
                     }
                     return a.code < b.code;
                   });
  return out;
}

json MetricsToJson(const IgnMetrics& m) {
  return {{"precision", m.base.precision},
          {"recall", m.base.recall},
          {"f1", m.base.f1},
          {"ign_precision", m.ign_precision},
          {"ign_recall", m.ign_recall},
          {"ign_f1", m.ign_f1},
          {"predicted", m.base.predicted},
          {"correct", m.base.correct},
          {"gold", m.base.gold},
          {"correct_in_train", m.correct_in_train}};
}

namespace {

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string PerRelationCsv(std::span<const RelationScore> rows) {
  std::string out = "relation,name,precision,recall,f1,predicted,correct,support\n";
  for (const RelationScore& r : rows) {
    absl::StrAppendFormat(&out, "%s,%s,%.6f,%.6f,%.6f,%d,%d,%d\n", r.code,
                          CsvField(r.name), r.precision, r.recall, r.f1,
                          r.predicted, r.correct, r.support);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage report

StageReport BuildStageReport(std::span<const DocumentResult> results) {
  StageReport rep;
  rep.documents = results.size();
  for (const DocumentResult& r : results) {
    rep.totals += r.counts;
    rep.diagnostics += r.diagnostics;
    if (!r.complete) ++rep.incomplete;
  }
  return rep;
}

namespace {

std::vector<std::pair<std::string, size_t>> ReportRows(const StageReport& r) {
  const StageCounts& c = r.totals;
  const GroundingDiagnostics& d = r.diagnostics;
  return {{"documents", r.documents},
          {"incomplete_documents", r.incomplete},
          {"epf_pairs", c.epf_pairs},
          {"epf_triples", c.epf_triples},
          {"head_candidates", c.head_candidates},
          {"tail_candidates", c.tail_candidates},
          {"rm_triples", c.rm_triples},
          {"rm_added", c.rm_added},
          {"fused_triples", c.fused},
          {"rc_off_pair_dropped", c.rc_off_pair_dropped},
          {"backend_calls", c.backend_calls},
          {"malformed_tuples", d.malformed_tuples},
          {"unresolved_entities", d.unresolved_entities},
          {"out_of_set_relations", d.out_of_set_relations},
          {"self_loops_dropped", d.self_loops_dropped},
          {"duplicates_dropped", d.duplicates_dropped}};
}

}  // namespace

std::string StageReport::ToText() const {
  std::string out;
  for (const auto& [name, value] : ReportRows(*this)) {
    absl::StrAppendFormat(&out, "%-22s %d\n", name, value);
  }
  return out;
}

std::string StageReport::ToCsv() const {
  std::string out = "metric,value\n";
  for (const auto& [name, value] : ReportRows(*this)) {
    absl::StrAppend(&out, name, ",", value, "\n");
  }
  return out;
}

absl::StatusOr<std::vector<DocumentResult>> ReadDocumentResults(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::vector<DocumentResult> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      return absl::DataLossError(
          absl::StrCat(path, " line ", line_no, ": not valid JSON"));
    }
    absl::StatusOr<DocumentResult> r = DocumentResultFromJson(j);
    if (!r.ok()) {
      return absl::DataLossError(
          absl::StrCat(path, " line ", line_no, ": ", r.status().message()));
    }
    out.push_back(*std::move(r));
  }
  return out;
}

}  // namespace relprior
