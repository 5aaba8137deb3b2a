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

#include "relprior/commands.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "relprior/assets.h"
#include "relprior/backend.h"
#include "relprior/evaluation.h"
#include "relprior/finetune_export.h"
#include "relprior/pipeline.h"
#include "relprior/predictions.h"
#include "relprior/prompting.h"
#include "string_bridge.h"

namespace relprior {

using nlohmann::json;

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDeadlineExceeded:
    case absl::StatusCode::kResourceExhausted:
      return kExitBackend;
    default:
      return kExitValidation;
  }
}

namespace {

int Fail(CommandIo io, const absl::Status& status) {
  io.err << "error: " << status.message() << "\n";
  return ExitCodeFor(status);
}

absl::StatusOr<json> ParseEmbedded(std::string_view text, std::string_view what) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::InternalError(absl::StrCat("bundled ", Sv(what), " is not valid JSON"));
  }
  return j;
}

absl::StatusOr<TemplateSet> LoadTemplates(const AppConfig& config) {
  if (config.GetString("paths.templates").empty()) return TemplateSet::Defaults();
  if (absl::Status s = config.RequireExisting("paths.templates"); !s.ok()) return s;
  return TemplateSet::LoadOverrides(config.GetString("paths.templates"));
}

std::filesystem::path OutDir(const AppConfig& config) {
  return std::filesystem::path(config.GetString("paths.out_dir"));
}

}  // namespace

absl::StatusOr<RelationRegistry> LoadRegistry(const AppConfig& config) {
  const std::string& rel_path = config.GetString("paths.rel_info");
  const std::string& alias_path = config.GetString("paths.aliases");
  absl::StatusOr<RelationRegistry> registry;
  if (rel_path.empty()) {
    absl::StatusOr<json> j = ParseEmbedded(assets::RelInfoJson(), "rel_info");
    if (!j.ok()) return j.status();
    registry = ParseRelationRegistry(*j);
  } else {
    if (absl::Status s = config.RequireExisting("paths.rel_info"); !s.ok()) return s;
    registry = LoadRelationRegistry(rel_path, std::nullopt);
  }
  if (!registry.ok() || alias_path.empty()) return registry;

  absl::StatusOr<json> aliases;
  if (alias_path == "builtin") {
    aliases = ParseEmbedded(assets::RelationAliasesJson(), "alias table");
  } else {
    if (absl::Status s = config.RequireExisting("paths.aliases"); !s.ok()) return s;
    std::ifstream in(alias_path, std::ios::binary);
    aliases = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (aliases->is_discarded()) {
      return absl::InvalidArgumentError(absl::StrCat(alias_path, ": not valid JSON"));
    }
  }
  if (!aliases.ok()) return aliases.status();
  absl::StatusOr<std::map<std::string, std::string>> table = ParseAliasTable(*aliases);
  if (!table.ok()) return table.status();
  if (absl::Status s = registry->SetAliases(*table); !s.ok()) return s;
  return registry;
}

absl::StatusOr<LoadedCorpus> LoadSplit(const AppConfig& config, const std::string& split,
                                       const RelationRegistry& registry) {
  LoadOptions options;
  options.expect_gold = false;
  options.registry = &registry;
  if (split == "selftest") {
    absl::StatusOr<json> j = ParseEmbedded(assets::SelftestDocsJson(), "fixture");
    if (!j.ok()) return j.status();
    return ParseCorpus(*j, options);
  }
  absl::StatusOr<std::string> path = config.SplitPath(split);
  if (!path.ok()) return path.status();
  if (!std::filesystem::exists(*path)) {
    return absl::NotFoundError(absl::StrCat("split.", split, " -> \"", *path,
                                            "\"; expected an existing DocRED JSON file"));
  }
  return LoadCorpus(*path, options);
}

// ---------------------------------------------------------------------------

int CmdStats(const AppConfig& config, const std::vector<std::string>& splits,
             CommandIo io) {
  absl::StatusOr<RelationRegistry> registry = LoadRegistry(config);
  if (!registry.ok()) return Fail(io, registry.status());
  io.out << absl::StrFormat("%-16s %6s %9s %10s %8s\n", "split", "docs", "entities",
                            "sentences", "triples");
  for (const std::string& split : splits) {
    absl::StatusOr<LoadedCorpus> corpus = LoadSplit(config, split, *registry);
    if (!corpus.ok()) return Fail(io, corpus.status());
    absl::StatusOr<CorpusStats> stats = ComputeCorpusStats(corpus->docs);
    if (!stats.ok()) return Fail(io, stats.status());
    io.out << absl::StrFormat("%-16s %6d %9.2f %10.2f %8.2f\n", split, stats->n_docs,
                              stats->mean_entities, stats->mean_sentences,
                              stats->mean_triples);
  }
  return kExitOk;
}

int CmdExport(const AppConfig& config, const std::string& split,
              const std::string& task, CommandIo io) {
  std::vector<std::string> tasks;
  if (task == "all") {
    tasks = {"epf", "rc", "head", "tail"};
  } else if (!ParseTaskKind(task).ok()) {
    return Fail(io, absl::InvalidArgumentError(absl::StrCat(
                        "task '", task, "'; expected one of epf|rc|head|tail|all")));
  } else {
    tasks = {task};
  }
  absl::StatusOr<RelationRegistry> registry = LoadRegistry(config);
  if (!registry.ok()) return Fail(io, registry.status());
  absl::StatusOr<TemplateSet> templates = LoadTemplates(config);
  if (!templates.ok()) return Fail(io, templates.status());
  absl::StatusOr<LoadedCorpus> corpus = LoadSplit(config, split, *registry);
  if (!corpus.ok()) return Fail(io, corpus.status());
  const SamplingConfig sampling = config.Sampling();
  PromptRenderer renderer(&*registry, *templates);

  for (const std::string& t : tasks) {
    const TaskKind kind = *ParseTaskKind(t);
    absl::StatusOr<ExportResult> result;
    switch (kind) {
      case TaskKind::kEpf:
        result = BuildEpfDataset(corpus->docs, renderer, sampling);
        break;
      case TaskKind::kRc:
        result = BuildRcDataset(corpus->docs, renderer);
        break;
      case TaskKind::kHead:
        result = BuildHeadDataset(corpus->docs, renderer);
        break;
      case TaskKind::kTail:
        result = BuildTailDataset(corpus->docs, renderer);
        break;
    }
    if (!result.ok()) return Fail(io, result.status());
    const std::string path = (OutDir(config) / "export" / (t + ".jsonl")).string();
    if (absl::Status s = WriteJsonl(result->records, path); !s.ok()) return Fail(io, s);
    io.out << absl::StrFormat(
        "%-4s %6d records -> %s (skipped: %d without entities, %d without triples; "
        "%d short of negatives)\n",
        t, result->records.size(), path, result->diag.no_entities,
        result->diag.no_triples, result->diag.short_negatives);
  }
  return kExitOk;
}

int CmdRun(const AppConfig& config, const std::string& split, CommandIo io) {
  absl::StatusOr<RelationRegistry> registry = LoadRegistry(config);
  if (!registry.ok()) return Fail(io, registry.status());
  absl::StatusOr<TemplateSet> templates = LoadTemplates(config);
  if (!templates.ok()) return Fail(io, templates.status());
  absl::StatusOr<LoadedCorpus> corpus = LoadSplit(config, split, *registry);
  if (!corpus.ok()) return Fail(io, corpus.status());
  PipelineConfig pipeline_config = config.Pipeline();
  if (absl::Status s = pipeline_config.Validate(); !s.ok()) return Fail(io, s);

  const std::string& kind = config.GetString("backend.kind");
  const std::string& log_path = config.GetString("paths.run_log");
  std::unique_ptr<Backend> inner;
  std::unique_ptr<RunLog> log;
  std::unique_ptr<Backend> backend;
  if (kind == "replay") {
    if (absl::Status s = config.RequireExisting("paths.run_log"); !s.ok()) {
      return Fail(io, s);
    }
    absl::StatusOr<std::unique_ptr<RunLog>> l = RunLog::Load(log_path);
    if (!l.ok()) return Fail(io, l.status());
    log = *std::move(l);
    backend = std::make_unique<ReplayBackend>(log.get());
  } else {
    if (kind == "oracle") {
      absl::StatusOr<std::unique_ptr<OracleBackend>> o =
          OracleBackend::Create(corpus->docs, &*registry, config.Noise());
      if (!o.ok()) return Fail(io, o.status());
      inner = *std::move(o);
    } else {
      absl::StatusOr<std::unique_ptr<HttpBackend>> h = HttpBackend::Create(config.Http());
      if (!h.ok()) return Fail(io, h.status());
      inner = *std::move(h);
    }
    absl::StatusOr<std::unique_ptr<RunLog>> l = RunLog::Open(log_path);
    if (!l.ok()) return Fail(io, l.status());
    log = *std::move(l);
    backend = std::make_unique<CachingBackend>(inner.get(), log.get());
  }

  Pipeline pipeline(&*registry, *templates, backend.get(), pipeline_config);
  absl::StatusOr<CorpusSummary> summary =
      pipeline.RunCorpus(corpus->docs, OutDir(config).string());
  if (!summary.ok()) return Fail(io, summary.status());
  io.out << absl::StrFormat("documents %d, processed %d, incomplete %d, predictions %d\n",
                            summary->documents, summary->processed, summary->incomplete,
                            summary->predictions);
  if (const auto* caching = dynamic_cast<const CachingBackend*>(backend.get())) {
    io.out << absl::StrFormat("run log %s: %d cached, %d new responses\n", log_path,
                              caching->hits(), caching->misses());
  }
  if (summary->interrupted) {
    io.out << "stopped after " << summary->processed
           << " documents (pipeline.stop_after); no outputs written\n";
  } else {
    io.out << "wrote " << (OutDir(config) / "predictions.json").string() << " and "
           << (OutDir(config) / "results.jsonl").string() << "\n";
  }
  if (summary->incomplete > 0) {
    io.err << summary->incomplete << " document(s) incomplete; worst status "
           << absl::StatusCodeToString(summary->worst_failure) << "\n";
    return kExitBackend;
  }
  return kExitOk;
}

int CmdEval(const AppConfig& config, const std::string& predictions_path,
            const std::string& split, const std::string& train_split, CommandIo io) {
  absl::StatusOr<RelationRegistry> registry = LoadRegistry(config);
  if (!registry.ok()) return Fail(io, registry.status());
  absl::StatusOr<LoadedCorpus> gold = LoadSplit(config, split, *registry);
  if (!gold.ok()) return Fail(io, gold.status());
  TrainFactSet train_facts;
  if (!train_split.empty()) {
    absl::StatusOr<LoadedCorpus> train = LoadSplit(config, train_split, *registry);
    if (!train.ok()) return Fail(io, train.status());
    train_facts = BuildTrainFactSet(train->docs);
  }
  absl::StatusOr<std::vector<Prediction>> predictions = ReadPredictions(predictions_path);
  if (!predictions.ok()) return Fail(io, predictions.status());
  absl::StatusOr<IgnMetrics> metrics = IgnScore(*predictions, gold->docs, train_facts);
  if (!metrics.ok()) return Fail(io, metrics.status());
  absl::StatusOr<std::vector<RelationScore>> rows =
      PerRelationF1(*predictions, gold->docs, &*registry);
  if (!rows.ok()) return Fail(io, rows.status());

  const std::string metrics_path = (OutDir(config) / "metrics.json").string();
  const std::string csv_path = (OutDir(config) / "per_relation.csv").string();
  const std::string metrics_text = MetricsToJson(*metrics).dump(2) + "\n";
  if (absl::Status s = WriteFileAtomically(metrics_path, metrics_text); !s.ok()) {
    return Fail(io, s);
  }
  if (absl::Status s = WriteFileAtomically(csv_path, PerRelationCsv(*rows)); !s.ok()) {
    return Fail(io, s);
  }
  io.out << metrics_text << "wrote " << metrics_path << " and " << csv_path << "\n";
  return kExitOk;
}

int CmdReport(const AppConfig& config, const std::string& results_path, CommandIo io) {
  absl::StatusOr<std::vector<DocumentResult>> results = ReadDocumentResults(results_path);
  if (!results.ok()) return Fail(io, results.status());
  const StageReport report = BuildStageReport(*results);
  const std::string text = report.ToText();
  const std::filesystem::path dir = OutDir(config);
  if (absl::Status s = WriteFileAtomically((dir / "stage_report.txt").string(), text);
      !s.ok()) {
    return Fail(io, s);
  }
  if (absl::Status s =
          WriteFileAtomically((dir / "stage_report.csv").string(), report.ToCsv());
      !s.ok()) {
    return Fail(io, s);
  }
  io.out << text;
  return kExitOk;
}

int CmdSelftest(const AppConfig& config, CommandIo io) {
  const auto start = std::chrono::steady_clock::now();
  absl::StatusOr<json> rel = ParseEmbedded(assets::RelInfoJson(), "rel_info");
  if (!rel.ok()) return Fail(io, rel.status());
  absl::StatusOr<RelationRegistry> registry = ParseRelationRegistry(*rel);
  if (!registry.ok()) return Fail(io, registry.status());
  absl::StatusOr<LoadedCorpus> corpus = LoadSplit(config, "selftest", *registry);
  if (!corpus.ok()) return Fail(io, corpus.status());

  // Zero noise regardless of configuration: the identity property.
  absl::StatusOr<std::unique_ptr<OracleBackend>> oracle =
      OracleBackend::Create(corpus->docs, &*registry, NoiseConfig{});
  if (!oracle.ok()) return Fail(io, oracle.status());
  PipelineConfig pipeline_config = config.Pipeline();
  pipeline_config.stop_after = 0;
  Pipeline pipeline(&*registry, TemplateSet::Defaults(), oracle->get(), pipeline_config);
  const std::vector<DocumentResult> results = pipeline.RunAll(corpus->docs);

  // Stage EPF (EPF then RC) reproduces gold exactly under a zero-noise
  // oracle. The fused set can exceed it: the head/tail merge pairs every
  // head of a relation with every tail of it.
  std::vector<Prediction> stage_epf;
  for (const DocumentResult& r : results) {
    for (const PredictedTriple& t : r.epf_triples) {
      stage_epf.push_back({t.title, t.h, t.t, t.r});
    }
  }
  const std::vector<Prediction> fused = CollectPredictions(results);
  absl::StatusOr<Metrics> epf = Score(stage_epf, corpus->docs);
  if (!epf.ok()) return Fail(io, epf.status());
  absl::StatusOr<IgnMetrics> m = IgnScore(fused, corpus->docs, TrainFactSet{});
  if (!m.ok()) return Fail(io, m.status());

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = epf->f1 == 1.0 && m->base.recall == 1.0 && m->ign_recall == 1.0;
  io.out << absl::StrFormat(
      "selftest: %d documents, %d gold triples\n"
      "  stage EPF  predicted %d  P=%.4f R=%.4f F1=%.4f\n"
      "  fused      predicted %d  P=%.4f R=%.4f F1=%.4f (%d from head/tail merge)\n"
      "%s (%.2fs)\n",
      corpus->docs.size(), m->base.gold, epf->predicted, epf->precision, epf->recall,
      epf->f1, m->base.predicted, m->base.precision, m->base.recall, m->base.f1,
      m->base.predicted - epf->predicted, ok ? "PASS" : "FAIL", secs);
  return ok ? kExitOk : kExitSelftest;
}

}  // namespace relprior
