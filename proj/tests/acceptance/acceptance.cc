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

// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance [--criteria 1-10] [--data-dir DIR]
//
// Criteria 1 and 2 read DocRED / Re-DocRED from --data-dir (default
// $RELPRIOR_DATA_DIR). When those files are missing they are reported as
// FAIL (data unavailable) and, if nothing else failed, the exit code is 77.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "relprior/commands.h"
#include "relprior/config.h"
#include "relprior/evaluation.h"
#include "relprior/finetune_export.h"
#include "relprior/parsing.h"
#include "relprior/pipeline.h"
#include "relprior/random.h"
#include "support/synthetic.h"

namespace relprior {
namespace {

// Pinned tolerances.
constexpr double kMeanTolerance = 0.1;
constexpr double kStatsSeconds = 30.0;
constexpr double kOracleSeconds = 60.0;
constexpr double kExact = 1e-12;

constexpr int kSkip = 77;

struct Outcome {
  bool pass = false;
  bool data_missing = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool Near(double a, double b, double tol) { return std::fabs(a - b) <= tol + 1e-9; }

void Info(const std::string& line) { std::printf("  INFO %s\n", line.c_str()); }

std::string DataDir(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("RELPRIOR_DATA_DIR");
  return env == nullptr ? "" : env;
}

// Configuration rooted at the data directory; the split file names are the
// config defaults.
absl::StatusOr<AppConfig> DataConfig(const std::string& data_dir) {
  return AppConfig::Load("", {"paths.data_dir=" + data_dir});
}

// ---------------------------------------------------------------------------
// 1. Corpus statistics

struct SplitExpectation {
  const char* split;
  size_t docs;
  double entities;
  double triples;
};

Outcome CorpusStatistics(const std::string& data_dir) {
  static const SplitExpectation kExpected[] = {
      {"docred_train", 3053, 19.5, 12.5},  {"docred_dev", 1000, 19.6, 12.3},
      {"redocred_train", 3053, 19.4, 28.1}, {"redocred_dev", 500, 19.4, 34.6},
      {"redocred_test", 500, 19.6, 34.9},
  };
  Outcome o;
  if (data_dir.empty()) {
    o.data_missing = true;
    o.detail = "data unavailable: set RELPRIOR_DATA_DIR";
    return o;
  }
  absl::StatusOr<AppConfig> config = DataConfig(data_dir);
  if (!config.ok()) return {false, false, std::string(config.status().message())};
  absl::StatusOr<RelationRegistry> registry = LoadRegistry(*config);
  if (!registry.ok()) return {false, false, std::string(registry.status().message())};

  const auto start = Clock::now();
  bool all = true;
  std::vector<std::string> rows;
  for (const SplitExpectation& e : kExpected) {
    absl::StatusOr<std::string> path = config->SplitPath(e.split);
    if (!path.ok() || !std::filesystem::exists(*path)) {
      o.data_missing = true;
      o.detail = "data unavailable: " + (path.ok() ? *path : std::string(e.split));
      return o;
    }
    absl::StatusOr<LoadedCorpus> corpus = LoadSplit(*config, e.split, *registry);
    if (!corpus.ok()) return {false, false, std::string(corpus.status().message())};
    absl::StatusOr<CorpusStats> s = ComputeCorpusStats(corpus->docs);
    if (!s.ok()) return {false, false, std::string(s.status().message())};
    const bool ok = s->n_docs == e.docs && Near(s->mean_entities, e.entities, kMeanTolerance) &&
                    Near(s->mean_triples, e.triples, kMeanTolerance);
    all = all && ok;
    rows.push_back(absl::StrFormat("%s %d docs %.2f ent %.2f triples%s", e.split, s->n_docs,
                                   s->mean_entities, s->mean_triples, ok ? "" : " (off)"));
  }
  const double secs = Seconds(start);
  o.pass = all && secs < kStatsSeconds;
  o.detail = absl::StrFormat("%s; %.2fs", absl::StrJoin(rows, "; "), secs);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Oracle identity

struct IdentityResult {
  Metrics stage_epf;
  IgnMetrics fused;
  double seconds = 0.0;
};

IdentityResult RunIdentity(const RelationRegistry& registry, std::span<const Document> docs,
                           const TrainFactSet& train) {
  const auto start = Clock::now();
  auto oracle = OracleBackend::Create(docs, &registry, {});
  Pipeline pipeline(&registry, TemplateSet::Defaults(), oracle->get(), {});
  std::vector<DocumentResult> results = pipeline.RunAll(docs);
  std::vector<Prediction> stage;
  for (const DocumentResult& r : results) {
    for (const PredictedTriple& t : r.epf_triples) stage.push_back({t.title, t.h, t.t, t.r});
  }
  IdentityResult out;
  out.stage_epf = *Score(stage, docs);
  out.fused = *IgnScore(CollectPredictions(results), docs, train);
  out.seconds = Seconds(start);
  return out;
}

std::string Describe(const IdentityResult& r) {
  const Metrics& f = r.fused.base;
  return absl::StrFormat(
      "fused P=%.4f R=%.4f F1=%.4f IgnR=%.4f (%d predicted, %d gold); stage EPF F1=%.4f; %.2fs",
      f.precision, f.recall, f.f1, r.fused.ign_recall, f.predicted, f.gold, r.stage_epf.f1,
      r.seconds);
}

bool IdentityHolds(const IdentityResult& r) {
  const Metrics& f = r.fused.base;
  return Near(f.precision, 1.0, kExact) && Near(f.recall, 1.0, kExact) &&
         Near(f.f1, 1.0, kExact) && Near(r.fused.ign_recall, 1.0, kExact) &&
         r.seconds < kOracleSeconds;
}

Outcome OracleIdentity(const std::string& data_dir) {
  // Measured on bundled and synthetic data regardless of the DocRED files.
  RelationRegistry registry = testing::BundledRegistry();
  {
    std::vector<Document> fixture = testing::FixtureDocs();
    Info("fixture: " + Describe(RunIdentity(registry, fixture, {})));
    std::vector<Document> synth = testing::SyntheticCorpus(registry, {});
    Info("synthetic 50 docs: " + Describe(RunIdentity(registry, synth, {})));
  }

  Outcome o;
  if (data_dir.empty()) {
    o.data_missing = true;
    o.detail = "data unavailable: set RELPRIOR_DATA_DIR";
    return o;
  }
  absl::StatusOr<AppConfig> config = DataConfig(data_dir);
  if (!config.ok()) return {false, false, std::string(config.status().message())};
  absl::StatusOr<RelationRegistry> docred_registry = LoadRegistry(*config);
  if (!docred_registry.ok()) {
    return {false, false, std::string(docred_registry.status().message())};
  }
  absl::StatusOr<std::string> dev_path = config->SplitPath("docred_dev");
  if (!dev_path.ok() || !std::filesystem::exists(*dev_path)) {
    o.data_missing = true;
    o.detail = "data unavailable: " + (dev_path.ok() ? *dev_path : "docred_dev");
    return o;
  }
  absl::StatusOr<LoadedCorpus> dev = LoadSplit(*config, "docred_dev", *docred_registry);
  if (!dev.ok()) return {false, false, std::string(dev.status().message())};
  TrainFactSet train;
  if (absl::StatusOr<LoadedCorpus> t = LoadSplit(*config, "docred_train", *docred_registry);
      t.ok()) {
    train = BuildTrainFactSet(t->docs);
  }
  std::vector<Document> subset(dev->docs.begin(),
                               dev->docs.begin() + std::min<size_t>(50, dev->docs.size()));
  IdentityResult r = RunIdentity(*docred_registry, subset, train);
  o.pass = subset.size() == 50 && IdentityHolds(r);
  o.detail = absl::StrFormat("%d dev docs: %s", subset.size(), Describe(r));
  return o;
}

// ---------------------------------------------------------------------------
// 3. Head/tail merge against a brute-force cross product

class ScriptedBackend : public Backend {
 public:
  std::map<TaskKind, std::string> replies;
  absl::StatusOr<std::string> Generate(const CompletionRequest& r) override {
    return replies[r.context.kind];
  }
};

Document PlainDocument(int n_entities, const std::string& title) {
  Document d;
  d.title = title;
  d.sents = {{"x"}};
  for (int i = 0; i < n_entities; ++i) {
    d.entities.push_back({i, {{absl::StrFormat("Entity %d", i), 0, 0, 1, "MISC"}}});
  }
  return d;
}

Outcome MergeEquivalence() {
  RelationRegistry registry = testing::BundledRegistry();
  StableRng rng(MixSeed(3, "merge"));
  int failures = 0;
  size_t total_triples = 0;
  for (int c = 0; c < 1000; ++c) {
    const int n_ent = 2 + static_cast<int>(rng.Below(19));
    const int n_rel = 1 + static_cast<int>(rng.Below(10));
    Document doc = PlainDocument(n_ent, absl::StrFormat("merge-%d", c));
    std::vector<std::string> rels;
    for (size_t i : rng.Sample(std::vector<size_t>(
                                   [&] {
                                     std::vector<size_t> v(registry.size());
                                     for (size_t k = 0; k < v.size(); ++k) v[k] = k;
                                     return v;
                                   }()),
                               n_rel)) {
      rels.push_back(registry.entries()[i].code);
    }
    std::set<std::pair<int, std::string>> heads;
    std::set<std::pair<std::string, int>> tails;
    std::string head_text, tail_text;
    const double density = rng.Uniform();
    for (int e = 0; e < n_ent; ++e) {
      for (const std::string& r : rels) {
        const std::string& name = registry.NameOf(r);
        if (rng.Bernoulli(density * 0.5)) {
          heads.emplace(e, r);
          head_text += FormatHeadLine(RepresentativeName(doc.entities[e]), name) + "\n";
        }
        if (rng.Bernoulli(density * 0.5)) {
          tails.emplace(r, e);
          tail_text += FormatTailLine(name, RepresentativeName(doc.entities[e])) + "\n";
        }
      }
    }
    ScriptedBackend backend;
    backend.replies[TaskKind::kHead] = head_text;
    backend.replies[TaskKind::kTail] = tail_text;
    Pipeline pipeline(&registry, TemplateSet::Defaults(), &backend, {});
    DocumentResult acc;
    absl::StatusOr<std::vector<PredictedTriple>> merged = pipeline.RunRm(doc, rels, &acc);

    std::set<std::tuple<int, int, std::string>> expected;
    for (const auto& [h, hr] : heads) {
      for (const auto& [tr, t] : tails) {
        if (hr == tr && h != t) expected.emplace(h, t, hr);
      }
    }
    std::set<std::tuple<int, int, std::string>> got;
    if (merged.ok()) {
      for (const PredictedTriple& p : *merged) got.emplace(p.h, p.t, p.r);
    }
    if (!merged.ok() || got != expected || merged->size() != got.size()) ++failures;
    total_triples += expected.size();
  }
  return {failures == 0, false,
          absl::StrFormat("1000 cases, %d mismatches, %d expected triples in total", failures,
                          total_triples)};
}

// ---------------------------------------------------------------------------
// 4. Fusion properties

Outcome FusionProperties() {
  RelationRegistry registry = testing::BundledRegistry();
  StableRng rng(MixSeed(4, "fusion"));
  std::map<std::string, int> violations;
  for (int c = 0; c < 1000; ++c) {
    const int n_ent = 2 + static_cast<int>(rng.Below(12));
    const size_t n_rel = 1 + rng.Below(8);
    auto random_triple = [&](Stage stage) {
      int h = static_cast<int>(rng.Below(n_ent));
      int t = static_cast<int>(rng.Below(n_ent - 1));
      if (t >= h) ++t;
      return PredictedTriple{"doc", h, t, registry.entries()[rng.Below(n_rel)].code, stage};
    };
    std::vector<PredictedTriple> epf, rm;
    const size_t n_epf = rng.Below(15), n_rm = rng.Below(25);
    for (size_t i = 0; i < n_epf; ++i) epf.push_back(random_triple(Stage::kEpf));
    for (size_t i = 0; i < n_rm; ++i) {
      // Half of the RM triples restate an EPF triple.
      if (!epf.empty() && rng.Bernoulli(0.5)) {
        PredictedTriple t = epf[rng.Below(epf.size())];
        t.stage = Stage::kRm;
        rm.push_back(t);
      } else {
        rm.push_back(random_triple(Stage::kRm));
      }
    }
    std::set<EntityPair> approved_set;
    for (const PredictedTriple& t : epf) approved_set.insert({t.h, t.t});
    std::vector<EntityPair> approved(approved_set.begin(), approved_set.end());

    using Key = std::tuple<int, int, std::string>;
    std::set<Key> epf_keys, union_keys;
    for (const auto& t : epf) epf_keys.emplace(t.h, t.t, t.r);
    union_keys = epf_keys;
    for (const auto& t : rm) union_keys.emplace(t.h, t.t, t.r);

    for (FusionMode mode : {FusionMode::kUnion, FusionMode::kStrict}) {
      std::vector<PredictedTriple> fused = Fuse(epf, rm, mode, approved);
      std::set<Key> seen;
      size_t epf_count = 0;
      for (const PredictedTriple& t : fused) {
        Key k{t.h, t.t, t.r};
        if (!union_keys.count(k)) ++violations["not in union"];
        if (!seen.insert(k).second) ++violations["duplicate"];
        if (registry.FindByCode(t.r) == nullptr) ++violations["invalid relation"];
        if (t.stage == Stage::kEpf) ++epf_count;
        if (t.stage == Stage::kRm && mode == FusionMode::kStrict &&
            !approved_set.count({t.h, t.t})) {
          ++violations["strict kept rejected pair"];
        }
      }
      if (epf_count != epf_keys.size()) ++violations["EPF provenance count"];
      if (mode == FusionMode::kUnion && seen != union_keys) ++violations["union incomplete"];
    }
  }
  std::vector<std::string> parts;
  for (const auto& [k, v] : violations) parts.push_back(absl::StrFormat("%s: %d", k, v));
  return {violations.empty(), false,
          violations.empty() ? "1000 cases, both fusion modes, no violations"
                             : absl::StrJoin(parts, "; ")};
}

// ---------------------------------------------------------------------------
// 5. Metrics against a brute-force recomputation

std::string Fold(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct BruteMetrics {
  double p, r, f1, ign_p, ign_f1;
};

double Div(double a, double b) { return b == 0 ? 0 : a / b; }
double F(double p, double r) { return p + r == 0 ? 0 : 2 * p * r / (p + r); }

// Direct definition: loops over raw lists, no shared helpers.
BruteMetrics Brute(const std::vector<Prediction>& preds, const std::vector<Document>& dev,
                   const std::vector<Document>& train) {
  std::vector<Prediction> uniq;
  for (const Prediction& p : preds) {
    if (std::find(uniq.begin(), uniq.end(), p) == uniq.end()) uniq.push_back(p);
  }
  size_t gold = 0;
  for (const Document& d : dev) {
    for (size_t i = 0; i < d.gold.size(); ++i) {
      bool dup = false;
      for (size_t j = 0; j < i; ++j) {
        dup |= d.gold[j].h == d.gold[i].h && d.gold[j].t == d.gold[i].t &&
               d.gold[j].r == d.gold[i].r;
      }
      if (!dup) ++gold;
    }
  }
  size_t correct = 0, in_train = 0;
  for (const Prediction& p : uniq) {
    const Document* doc = nullptr;
    for (const Document& d : dev) {
      if (d.title == p.title && doc == nullptr) doc = &d;
    }
    bool hit = false;
    for (const GoldTriple& g : doc->gold) hit |= g.h == p.h && g.t == p.t && g.r == p.r;
    if (!hit) continue;
    ++correct;
    bool seen = false;
    for (const Document& td : train) {
      for (const GoldTriple& g : td.gold) {
        if (g.r != p.r) continue;
        for (const Mention& a : td.entities[g.h].mentions) {
          for (const Mention& b : td.entities[g.t].mentions) {
            for (const Mention& x : doc->entities[p.h].mentions) {
              for (const Mention& y : doc->entities[p.t].mentions) {
                seen |= Fold(a.name) == Fold(x.name) && Fold(b.name) == Fold(y.name);
              }
            }
          }
        }
      }
    }
    if (seen) ++in_train;
  }
  BruteMetrics m;
  m.p = Div(correct, uniq.size());
  m.r = Div(correct, gold);
  m.f1 = F(m.p, m.r);
  m.ign_p = Div(static_cast<double>(correct - in_train),
                static_cast<double>(uniq.size() - in_train));
  m.ign_f1 = F(m.ign_p, m.r);
  return m;
}

std::vector<Document> MicroCorpus(StableRng& rng, const std::string& prefix,
                                  const RelationRegistry& registry, bool need_gold) {
  static const char* kNames[] = {"Ada", "ada", "Berlin", "BERLIN", "Cole", "Dana", "Erie"};
  const size_t n_docs = 1 + rng.Below(5);
  std::vector<Document> docs;
  for (size_t d = 0; d < n_docs; ++d) {
    Document doc;
    doc.title = absl::StrFormat("%s-%d", prefix, d);
    doc.sents = {{"x"}};
    const int n_ent = 2 + static_cast<int>(rng.Below(7));
    for (int e = 0; e < n_ent; ++e) {
      Entity ent{e, {}};
      const size_t n_m = 1 + rng.Below(2);
      for (size_t m = 0; m < n_m; ++m) {
        ent.mentions.push_back({kNames[rng.Below(7)], 0, 0, 1, "MISC"});
      }
      doc.entities.push_back(ent);
    }
    const size_t n_gold = rng.Below(6);
    for (size_t g = 0; g < n_gold; ++g) {
      int h = static_cast<int>(rng.Below(n_ent));
      int t = static_cast<int>(rng.Below(n_ent - 1));
      if (t >= h) ++t;
      doc.gold.push_back({h, t, registry.entries()[rng.Below(3)].code, {}});
    }
    docs.push_back(doc);
  }
  if (need_gold && std::all_of(docs.begin(), docs.end(),
                               [](const Document& d) { return d.gold.empty(); })) {
    docs[0].gold.push_back({0, 1, registry.entries()[0].code, {}});
  }
  return docs;
}

Outcome MetricOracle() {
  RelationRegistry registry = testing::BundledRegistry();
  StableRng rng(MixSeed(5, "metrics"));
  int mismatches = 0;
  auto same = [](double a, double b) { return std::fabs(a - b) <= kExact; };
  for (int c = 0; c < 200; ++c) {
    std::vector<Document> dev = MicroCorpus(rng, absl::StrFormat("dev%d", c), registry, true);
    std::vector<Document> train = MicroCorpus(rng, "train", registry, false);
    std::vector<Prediction> preds;
    const size_t n_pred = rng.Below(12);  // includes the empty case
    for (size_t i = 0; i < n_pred; ++i) {
      const Document& d = dev[rng.Below(dev.size())];
      if (!d.gold.empty() && rng.Bernoulli(0.5)) {
        const GoldTriple& g = d.gold[rng.Below(d.gold.size())];
        preds.push_back({d.title, g.h, g.t, g.r});
      } else {
        const int n = static_cast<int>(d.entities.size());
        preds.push_back({d.title, static_cast<int>(rng.Below(n)),
                         static_cast<int>(rng.Below(n)), registry.entries()[rng.Below(3)].code});
      }
    }
    absl::StatusOr<Metrics> s = Score(preds, dev);
    absl::StatusOr<IgnMetrics> ig = IgnScore(preds, dev, BuildTrainFactSet(train));
    BruteMetrics b = Brute(preds, dev, train);
    if (!s.ok() || !ig.ok() || !same(s->precision, b.p) || !same(s->recall, b.r) ||
        !same(s->f1, b.f1) || !same(ig->ign_precision, b.ign_p) ||
        !same(ig->ign_recall, b.r) || !same(ig->ign_f1, b.ign_f1)) {
      ++mismatches;
    }
  }

  // Hand fixture: three predictions, two correct, one of those in train.
  auto doc = [](std::string title, std::vector<std::string> names,
                std::vector<GoldTriple> gold) {
    Document d;
    d.title = std::move(title);
    d.sents = {{"x"}};
    for (size_t i = 0; i < names.size(); ++i) {
      d.entities.push_back({static_cast<int>(i), {{names[i], 0, 0, 1, "MISC"}}});
    }
    d.gold = std::move(gold);
    return d;
  };
  std::vector<Document> dev = {
      doc("dev", {"Ada", "London", "Paris"}, {{0, 1, "P19", {}}, {0, 2, "P20", {}}})};
  std::vector<Document> train = {doc("train", {"Ada", "London"}, {{0, 1, "P19", {}}})};
  std::vector<Prediction> preds = {
      {"dev", 0, 1, "P19"}, {"dev", 0, 2, "P20"}, {"dev", 1, 2, "P17"}};
  IgnMetrics hand = *IgnScore(preds, dev, BuildTrainFactSet(train));
  const bool hand_ok = same(hand.ign_precision, 0.5) && same(hand.ign_recall, 1.0) &&
                       same(hand.ign_f1, 2.0 / 3.0);

  // 0/0 conventions.
  IgnMetrics none = *IgnScore({}, dev, {});
  std::vector<Prediction> only_train = {{"dev", 0, 1, "P19"}};
  IgnMetrics all_train = *IgnScore(only_train, dev, BuildTrainFactSet(train));
  const bool zero_ok = none.base.precision == 0 && none.base.f1 == 0 &&
                       none.ign_precision == 0 && none.ign_f1 == 0 &&
                       all_train.ign_precision == 0 && all_train.ign_f1 == 0 &&
                       SafeRatio(0, 0) == 0 && HarmonicMean(0, 0) == 0;
  return {mismatches == 0 && hand_ok && zero_ok, false,
          absl::StrFormat("200 micro-corpora, %d mismatches; hand fixture ign P=%.4f R=%.4f "
                          "F1=%.4f (%s); 0/0 conventions %s",
                          mismatches, hand.ign_precision, hand.ign_recall, hand.ign_f1,
                          hand_ok ? "ok" : "wrong", zero_ok ? "ok" : "wrong")};
}

// ---------------------------------------------------------------------------
// 6. Out-of-set labels

struct CorruptionRun {
  Metrics stage;
  size_t out_of_set = 0;
  std::vector<Prediction> predictions;
};

CorruptionRun RunCorrupted(const RelationRegistry& registry, std::span<const Document> docs) {
  NoiseConfig noise;
  noise.label_corruption_rate = 1.0;
  noise.seed = 7;
  auto oracle = OracleBackend::Create(docs, &registry, noise);
  PipelineConfig config;
  config.enable_rm = false;
  Pipeline pipeline(&registry, TemplateSet::Defaults(), oracle->get(), config);
  CorruptionRun out;
  for (const DocumentResult& r : pipeline.RunAll(docs)) {
    out.out_of_set += r.diagnostics.out_of_set_relations;
    for (const PredictedTriple& t : r.epf_triples) {
      out.predictions.push_back({t.title, t.h, t.t, t.r});
    }
  }
  out.stage = *Score(out.predictions, docs);
  return out;
}

Outcome OutOfSetLabels() {
  std::vector<Document> docs = testing::FixtureDocs();
  size_t gold = 0;
  for (const Document& d : docs) gold += d.gold.size();

  RelationRegistry strict = testing::BundledRegistry();
  CorruptionRun without = RunCorrupted(strict, docs);
  CorruptionRun again = RunCorrupted(strict, docs);

  RelationRegistry aliased = testing::BundledRegistry();
  (void)aliased.SetAliases(CorruptionAliasTable(aliased));
  CorruptionRun with = RunCorrupted(aliased, docs);
  CorruptionRun with_again = RunCorrupted(aliased, docs);

  const bool deterministic = without.predictions == again.predictions &&
                             without.out_of_set == again.out_of_set &&
                             with.predictions == with_again.predictions;
  const bool ok = without.stage.f1 == 0.0 && without.out_of_set == gold &&
                  Near(with.stage.f1, 1.0, kExact) && deterministic;
  return {ok, false,
          absl::StrFormat("no aliases: RC-stage F1=%.4f, %d/%d labels dropped as out-of-set; "
                          "with aliases: stage-EPF F1=%.4f; deterministic=%s",
                          without.stage.f1, without.out_of_set, gold, with.stage.f1,
                          deterministic ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 7. Noise monotonicity

Outcome NoiseMonotonicity() {
  RelationRegistry registry = testing::BundledRegistry();
  testing::SyntheticOptions opts;
  opts.docs = 30;
  std::vector<Document> docs = testing::SyntheticCorpus(registry, opts);
  const double rates[] = {0.0, 0.25, 0.5};
  double mean[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
      NoiseConfig noise;
      noise.omission_rate = rates[i];
      noise.seed = seed;
      auto oracle = OracleBackend::Create(docs, &registry, noise);
      Pipeline pipeline(&registry, TemplateSet::Defaults(), oracle->get(), {});
      mean[i] += Score(CollectPredictions(pipeline.RunAll(docs)), docs)->f1 / 10.0;
    }
  }
  return {mean[0] > mean[1] && mean[1] > mean[2], false,
          absl::StrFormat("mean fused F1 over seeds 1..10 on %d synthetic docs: "
                          "omission 0 -> %.4f, 0.25 -> %.4f, 0.5 -> %.4f",
                          docs.size(), mean[0], mean[1], mean[2])};
}

// ---------------------------------------------------------------------------
// 8. Closed-loop export

struct ExportBundle {
  ExportResult epf, epf_per_pair, rc, head, tail;
  std::string bytes;
};

absl::StatusOr<ExportBundle> ExportAll(std::span<const Document> docs,
                                       const PromptRenderer& renderer) {
  SamplingConfig per_pair;
  per_pair.mode = SamplingMode::kPerPair;
  auto epf = BuildEpfDataset(docs, renderer, {});
  auto epf_per_pair = BuildEpfDataset(docs, renderer, per_pair);
  auto rc = BuildRcDataset(docs, renderer);
  auto head = BuildHeadDataset(docs, renderer);
  auto tail = BuildTailDataset(docs, renderer);
  for (const absl::Status& s : {epf.status(), epf_per_pair.status(), rc.status(),
                                head.status(), tail.status()}) {
    if (!s.ok()) return s;
  }
  ExportBundle b{*std::move(epf), *std::move(epf_per_pair), *std::move(rc),
                 *std::move(head), *std::move(tail), ""};
  for (const ExportResult* r : {&b.epf, &b.epf_per_pair, &b.rc, &b.head, &b.tail}) {
    b.bytes += SerializeJsonl(r->records);
  }
  return b;
}

Outcome ClosedLoopExport() {
  RelationRegistry registry = testing::BundledRegistry();
  testing::SyntheticOptions opts;
  opts.docs = 20;
  opts.seed = 8;
  std::vector<Document> docs = testing::SyntheticCorpus(registry, opts);
  PromptRenderer renderer(&registry, TemplateSet::Defaults());
  std::map<std::string, const Document*> by_title;
  for (const Document& d : docs) by_title[d.title] = &d;

  absl::StatusOr<ExportBundle> first = ExportAll(docs, renderer);
  absl::StatusOr<ExportBundle> second = ExportAll(docs, renderer);
  if (!first.ok() || !second.ok()) return {false, false, "export failed"};

  using Pairs = std::set<std::pair<int, int>>;
  auto gold_pairs = [](const Document& d) {
    Pairs s;
    for (const auto& g : d.gold) s.emplace(g.h, g.t);
    return s;
  };
  int mismatches = 0;
  for (const auto& rec : first->epf.records) {
    const Document& d = *by_title.at(rec.title);
    Pairs got;
    for (const EntityPair& p : ParseEpf(rec.output, d).items) got.emplace(p.head, p.tail);
    mismatches += got != gold_pairs(d);
  }
  // Per-pair records: the positives of a document, taken together, are its
  // gold pairs; negative targets parse to nothing.
  std::map<std::string, Pairs> positives;
  for (const auto& rec : first->epf_per_pair.records) {
    const Document& d = *by_title.at(rec.title);
    for (const EntityPair& p : ParseEpf(rec.output, d).items) {
      positives[rec.title].emplace(p.head, p.tail);
    }
  }
  for (const Document& d : docs) mismatches += positives[d.title] != gold_pairs(d);
  for (const auto& rec : first->rc.records) {
    const Document& d = *by_title.at(rec.title);
    std::set<std::tuple<int, int, std::string>> got, want;
    for (const Triple& t : ParseRc(rec.output, d, registry).items) {
      got.emplace(t.head, t.tail, t.relation);
    }
    for (const auto& g : d.gold) want.emplace(g.h, g.t, g.r);
    mismatches += got != want;
  }
  for (const auto& rec : first->head.records) {
    const Document& d = *by_title.at(rec.title);
    std::set<std::pair<int, std::string>> got, want;
    for (const HeadCandidate& h : ParseHead(rec.output, d, registry).items) {
      got.emplace(h.entity, h.relation);
    }
    for (const auto& g : d.gold) want.emplace(g.h, g.r);
    mismatches += got != want;
  }
  for (const auto& rec : first->tail.records) {
    const Document& d = *by_title.at(rec.title);
    std::set<std::pair<std::string, int>> got, want;
    for (const TailCandidate& t : ParseTail(rec.output, d, registry).items) {
      got.emplace(t.relation, t.entity);
    }
    for (const auto& g : d.gold) want.emplace(g.r, g.t);
    mismatches += got != want;
  }
  const size_t records = first->epf.records.size() + first->epf_per_pair.records.size() +
                         first->rc.records.size() + first->head.records.size() +
                         first->tail.records.size();
  const bool complete = first->epf.records.size() == docs.size() &&
                        first->rc.records.size() == docs.size() &&
                        first->head.records.size() == docs.size() &&
                        first->tail.records.size() == docs.size();
  const bool identical = first->bytes == second->bytes;
  return {mismatches == 0 && identical && complete, false,
          absl::StrFormat("20 synthetic docs, %d records, %d projection mismatches; "
                          "byte-identical rerun: %s",
                          records, mismatches, identical ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. Parser fuzz

struct FuzzVocab {
  std::vector<std::string> entities;   // mention names of the target document
  std::vector<std::string> relations;  // registry names, codes, an alias
  std::vector<std::string> any;        // everything, from every document
};

std::string RandomText(StableRng& rng, const FuzzVocab& v) {
  auto pick = [&](const std::vector<std::string>& from) {
    return rng.Bernoulli(0.15) ? v.any[rng.Below(v.any.size())] : from[rng.Below(from.size())];
  };
  std::string s;
  if (rng.Bernoulli(0.4)) {
    // Tuple-shaped lines with occasional damage.
    const size_t lines = 1 + rng.Below(6);
    for (size_t i = 0; i < lines; ++i) {
      std::vector<std::string> fields;
      switch (rng.Below(3)) {
        case 0:
          fields = {pick(v.entities), rng.Bernoulli(0.5) ? "1" : pick(v.relations),
                    pick(v.entities)};
          break;
        case 1:
          fields = {pick(v.entities), pick(v.relations)};
          break;
        default:
          fields = {pick(v.relations), pick(v.entities)};
      }
      std::string line = "(" + absl::StrJoin(fields, ", ") + ")";
      if (rng.Bernoulli(0.1)) line.erase(rng.Below(line.size()), 1);
      s += line + (rng.Bernoulli(0.8) ? "\n" : " ");
    }
    return s;
  }
  const size_t len = rng.Below(160);
  if (rng.Bernoulli(0.5)) {
    for (size_t i = 0; i < len; ++i) s += static_cast<char>(rng.Below(256));
    return s;
  }
  static const char* kPunct[] = {"(", ")", ", ", ",", "\n", " ", "1", "0", "((", "))", "\""};
  while (s.size() < len) {
    if (rng.Bernoulli(0.45)) {
      s += kPunct[rng.Below(std::size(kPunct))];
    } else if (rng.Bernoulli(0.8)) {
      s += v.any[rng.Below(v.any.size())];
    } else {
      s += static_cast<char>(32 + rng.Below(95));
    }
  }
  return s;
}

template <typename T>
bool Conserves(const ParseResult<T>& r) {
  return r.items.size() + r.diag.Drops() == r.groups;
}

Outcome ParserFuzz() {
  RelationRegistry registry = testing::BundledRegistry(/*with_aliases=*/true);
  std::vector<Document> docs = testing::FixtureDocs();
  testing::SyntheticOptions opts;
  opts.docs = 3;
  for (Document& d : testing::SyntheticCorpus(registry, opts)) docs.push_back(d);
  std::vector<std::string> relations = {"nationality"};
  for (const RelationId& r : registry.entries()) {
    relations.push_back(r.name);
    relations.push_back(r.code);
  }
  std::vector<FuzzVocab> vocab;
  std::vector<std::string> any = relations;
  for (const Document& d : docs) {
    FuzzVocab v{{}, relations, {}};
    for (const Entity& e : d.entities) {
      for (const Mention& m : e.mentions) v.entities.push_back(m.name);
    }
    any.insert(any.end(), v.entities.begin(), v.entities.end());
    vocab.push_back(std::move(v));
  }
  for (FuzzVocab& v : vocab) v.any = any;

  StableRng rng(MixSeed(9, "fuzz"));
  size_t failures = 0, exceptions = 0, groups = 0, items = 0;
  for (int i = 0; i < 10000; ++i) {
    const size_t which = rng.Below(docs.size());
    const Document& doc = docs[which];
    const std::string text = RandomText(rng, vocab[which]);
    try {
      auto e = ParseEpf(text, doc);
      auto r = ParseRc(text, doc, registry);
      auto h = ParseHead(text, doc, registry);
      auto t = ParseTail(text, doc, registry);
      failures += !Conserves(e) + !Conserves(r) + !Conserves(h) + !Conserves(t);
      groups += e.groups + r.groups + h.groups + t.groups;
      items += e.items.size() + r.items.size() + h.items.size() + t.items.size();
    } catch (...) {
      ++exceptions;
    }
  }
  return {failures == 0 && exceptions == 0, false,
          absl::StrFormat("10000 strings x 4 parsers: %d conservation failures, %d exceptions "
                          "(%d groups, %d parsed)",
                          failures, exceptions, groups, items)};
}

// ---------------------------------------------------------------------------
// 10. Resume determinism

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome ResumeDeterminism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "relprior_acceptance_resume";
  fs::remove_all(root);
  fs::create_directories(root);
  RelationRegistry registry = testing::BundledRegistry();
  testing::SyntheticOptions opts;
  opts.docs = 25;
  opts.seed = 10;
  {
    std::ofstream out(root / "corpus.json");
    out << CorpusToJson(testing::SyntheticCorpus(registry, opts)).dump();
  }
  auto config = [&](const std::string& name, std::vector<std::string> extra) {
    std::vector<std::string> o = {
        "split.synthetic=" + (root / "corpus.json").string(),
        "paths.out_dir=" + (root / name).string(),
        "paths.run_log=" + (root / (name + ".log.jsonl")).string(),
        "oracle.omission_rate=0.2", "oracle.spurious_rate=0.05",
        "oracle.label_corruption_rate=0.1", "oracle.seed=3"};
    o.insert(o.end(), extra.begin(), extra.end());
    return *AppConfig::Load("", o);
  };
  std::ostringstream sink;
  CommandIo io{sink, sink};
  const int full = CmdRun(config("full", {}), "synthetic", io);
  const int stopped = CmdRun(config("resumed", {"pipeline.stop_after=9"}), "synthetic", io);
  const bool nothing_written = !fs::exists(root / "resumed" / "predictions.json");
  std::ostringstream resumed_out;
  CommandIo resumed_io{resumed_out, resumed_out};
  const int resumed = CmdRun(config("resumed", {}), "synthetic", resumed_io);

  const std::string a = Slurp(root / "full" / "predictions.json");
  const std::string b = Slurp(root / "resumed" / "predictions.json");
  const bool cached = resumed_out.str().find(" 0 cached") == std::string::npos;
  const bool ok = full == kExitOk && stopped == kExitOk && resumed == kExitOk &&
                  nothing_written && cached && !a.empty() && a == b;
  return {ok, false,
          absl::StrFormat("stop after 9 of 25 docs, then resume from the run log: "
                          "predictions %s (%d bytes); resumed run used cached responses: %s",
                          a == b ? "byte-identical" : "DIFFER", a.size(), cached ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

absl::StatusOr<std::set<int>> ParseSelection(const std::string& spec) {
  std::set<int> out;
  for (absl::string_view part : absl::StrSplit(absl::string_view(spec.data(), spec.size()), ',')) {
    std::vector<std::string> ends = absl::StrSplit(part, '-');
    int lo = 0, hi = 0;
    if (ends.empty() || ends.size() > 2 || !absl::SimpleAtoi(ends.front(), &lo) ||
        !absl::SimpleAtoi(ends.back(), &hi) || lo < 1 || hi > 10 || lo > hi) {
      return absl::InvalidArgumentError("--criteria expects e.g. 1-10 or 3,5,7");
    }
    for (int i = lo; i <= hi; ++i) out.insert(i);
  }
  return out;
}

int Main(int argc, char** argv) {
  CLI::App app{"RelPrior acceptance checks"};
  std::string criteria = "1-10";
  std::string data_flag;
  app.add_option("--criteria", criteria, "criteria to run, e.g. 1-10 or 3,5");
  app.add_option("--data-dir", data_flag, "DocRED / Re-DocRED root (default $RELPRIOR_DATA_DIR)");
  CLI11_PARSE(app, argc, argv);
  absl::StatusOr<std::set<int>> selected = ParseSelection(criteria);
  if (!selected.ok()) {
    std::fprintf(stderr, "%s\n", std::string(selected.status().message()).c_str());
    return 1;
  }
  const std::string data_dir = DataDir(data_flag);

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> checks = {
      {1, {"corpus statistics", [&] { return CorpusStatistics(data_dir); }}},
      {2, {"oracle identity", [&] { return OracleIdentity(data_dir); }}},
      {3, {"head/tail merge equivalence", MergeEquivalence}},
      {4, {"fusion properties", FusionProperties}},
      {5, {"metric oracle", MetricOracle}},
      {6, {"out-of-set labels", OutOfSetLabels}},
      {7, {"noise monotonicity", NoiseMonotonicity}},
      {8, {"closed-loop export", ClosedLoopExport}},
      {9, {"parser fuzz", ParserFuzz}},
      {10, {"resume determinism", ResumeDeterminism}},
  };
  int failed = 0, missing = 0;
  for (int id : *selected) {
    const auto& [name, run] = checks.at(id);
    const Outcome o = run();
    std::printf("criterion %2d %-28s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) (o.data_missing ? missing : failed) += 1;
  }
  if (failed > 0) return 1;
  return missing > 0 ? kSkip : 0;
}

}  // namespace
}  // namespace relprior

int main(int argc, char** argv) { return relprior::Main(argc, argv); }
