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

#include "relprior/pipeline.h"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <set>
#include <thread>
#include <tuple>

#include "absl/strings/str_cat.h"
#include "string_bridge.h"

namespace relprior {

using nlohmann::json;

std::string_view StageName(Stage stage) {
  return stage == Stage::kEpf ? "EPF" : "RM";
}

absl::StatusOr<FusionMode> ParseFusionMode(std::string_view name) {
  if (name == "union") return FusionMode::kUnion;
  if (name == "strict") return FusionMode::kStrict;
  return absl::InvalidArgumentError(
      absl::StrCat("fusion.mode '", Sv(name), "' (expected union|strict)"));
}

std::string_view FusionModeName(FusionMode mode) {
  return mode == FusionMode::kUnion ? "union" : "strict";
}

StageCounts& StageCounts::operator+=(const StageCounts& o) {
  epf_pairs += o.epf_pairs;
  epf_triples += o.epf_triples;
  head_candidates += o.head_candidates;
  tail_candidates += o.tail_candidates;
  rm_triples += o.rm_triples;
  rm_added += o.rm_added;
  fused += o.fused;
  rc_off_pair_dropped += o.rc_off_pair_dropped;
  backend_calls += o.backend_calls;
  return *this;
}

absl::Status PipelineConfig::Validate() const {
  if (absl::Status s = decoding.Validate(); !s.ok()) return s;
  for (const auto& [kind, params] : stage_decoding) {
    if (absl::Status s = params.Validate(); !s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(Sv(TaskKindName(kind)), " decoding: ", s.message()));
    }
  }
  if (epf_passes < 1 || epf_passes > 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("epf.passes ", epf_passes, " outside [1, 2]"));
  }
  if (max_concurrency < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("backend.max_concurrency ", max_concurrency, " must be >= 1"));
  }
  return absl::OkStatus();
}

DecodingParams PipelineConfig::DecodingFor(TaskKind kind) const {
  auto it = stage_decoding.find(kind);
  return it == stage_decoding.end() ? decoding : it->second;
}

// ---------------------------------------------------------------------------
// Set algebra

std::vector<PredictedTriple> MergeHeadTail(const std::string& title,
                                           std::span<const HeadCandidate> heads,
                                           std::span<const TailCandidate> tails) {
  std::vector<PredictedTriple> out;
  std::set<std::tuple<int, int, std::string>> seen;
  for (const HeadCandidate& h : heads) {
    for (const TailCandidate& t : tails) {
      if (h.relation != t.relation || h.entity == t.entity) continue;
      if (!seen.emplace(h.entity, t.entity, h.relation).second) continue;
      out.push_back({title, h.entity, t.entity, h.relation, Stage::kRm});
    }
  }
  return out;
}

std::vector<PredictedTriple> Fuse(std::span<const PredictedTriple> epf,
                                  std::span<const PredictedTriple> rm,
                                  FusionMode mode,
                                  std::span<const EntityPair> epf_pairs) {
  std::set<EntityPair> approved(epf_pairs.begin(), epf_pairs.end());
  std::set<std::tuple<std::string, int, int, std::string>> seen;
  std::vector<PredictedTriple> out;
  for (const PredictedTriple& t : epf) {
    if (!seen.emplace(t.title, t.h, t.t, t.r).second) continue;
    PredictedTriple tagged = t;
    tagged.stage = Stage::kEpf;
    out.push_back(std::move(tagged));
  }
  for (const PredictedTriple& t : rm) {
    if (mode == FusionMode::kStrict && approved.count({t.h, t.t}) == 0) continue;
    if (!seen.emplace(t.title, t.h, t.t, t.r).second) continue;
    PredictedTriple tagged = t;
    tagged.stage = Stage::kRm;
    out.push_back(std::move(tagged));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(const RelationRegistry* registry, TemplateSet templates,
                   Backend* backend, PipelineConfig config)
    : registry_(registry),
      renderer_(registry, std::move(templates)),
      backend_(backend),
      config_(std::move(config)) {}

absl::StatusOr<std::string> Pipeline::Call(const std::string& prompt,
                                           TaskContext ctx,
                                           DocumentResult* acc) const {
  const DecodingParams decoding = config_.DecodingFor(ctx.kind);
  CompletionRequest req{prompt, std::move(ctx), decoding};
  ++acc->counts.backend_calls;
  return backend_->Generate(req);
}

namespace {

size_t EstimateTokens(const RenderedPrompt& p) {
  return (p.instruction.size() + p.input.size() + 1 + 3) / 4;
}

void AddUnique(std::vector<EntityPair>& out, std::set<EntityPair>& seen,
               std::span<const EntityPair> pairs) {
  for (const EntityPair& p : pairs) {
    if (seen.insert(p).second) out.push_back(p);
  }
}

std::vector<EntityPair> ToEntityPairs(
    const std::vector<std::pair<int, int>>& pairs) {
  std::vector<EntityPair> out;
  out.reserve(pairs.size());
  for (const auto& [h, t] : pairs) out.push_back({h, t});
  return out;
}

std::vector<std::pair<int, int>> ToStdPairs(std::span<const EntityPair> pairs) {
  std::vector<std::pair<int, int>> out;
  out.reserve(pairs.size());
  for (const EntityPair& p : pairs) out.emplace_back(p.head, p.tail);
  return out;
}

}  // namespace

absl::StatusOr<std::vector<EntityPair>> Pipeline::EpfChunked(
    const Document& doc, DocumentResult* acc) const {
  const int n = static_cast<int>(doc.entities.size());
  // Smallest chunk count whose within-chunk prompts all fit the budget.
  std::vector<std::vector<int>> chunks;
  for (int k = 2; k <= n; ++k) {
    const int size = (n + k - 1) / k;
    std::vector<std::vector<int>> candidate;
    for (int start = 0; start < n; start += size) {
      std::vector<int> chunk;
      for (int i = start; i < std::min(n, start + size); ++i) chunk.push_back(i);
      candidate.push_back(std::move(chunk));
    }
    bool fits = true;
    for (const auto& chunk : candidate) {
      absl::StatusOr<RenderedPrompt> p = renderer_.RenderEpf(doc, chunk);
      if (!p.ok()) return p.status();
      if (EstimateTokens(*p) > config_.epf_token_budget) {
        fits = false;
        break;
      }
    }
    chunks = std::move(candidate);
    if (fits || size <= 2) break;
  }

  std::vector<EntityPair> related;
  std::set<EntityPair> seen;
  for (const auto& chunk : chunks) {
    if (chunk.size() < 2) continue;
    std::vector<EntityPair> payload;
    for (int h : chunk) {
      for (int t : chunk) {
        if (h != t) payload.push_back({h, t});
      }
    }
    absl::StatusOr<RenderedPrompt> p = renderer_.RenderEpf(doc, chunk);
    if (!p.ok()) return p.status();
    absl::StatusOr<std::string> resp =
        Call(p->Full(), {TaskKind::kEpf, doc.title, payload, {}}, acc);
    if (!resp.ok()) return resp.status();
    ParseResult<EntityPair> parsed = ParseEpf(*resp, doc);
    acc->diagnostics += parsed.diag;
    AddUnique(related, seen, parsed.items);
  }
  if (config_.epf_passes < 2) return related;
  for (size_t a = 0; a < chunks.size(); ++a) {
    for (size_t b = a + 1; b < chunks.size(); ++b) {
      std::vector<EntityPair> payload;
      for (int h : chunks[a]) {
        for (int t : chunks[b]) {
          payload.push_back({h, t});
          payload.push_back({t, h});
        }
      }
      std::vector<std::pair<int, int>> listed = ToStdPairs(payload);
      absl::StatusOr<RenderedPrompt> p = renderer_.RenderEpfPairs(doc, listed);
      if (!p.ok()) return p.status();
      absl::StatusOr<std::string> resp =
          Call(p->Full(), {TaskKind::kEpf, doc.title, payload, {}}, acc);
      if (!resp.ok()) return resp.status();
      ParseResult<EntityPair> parsed = ParseEpf(*resp, doc);
      acc->diagnostics += parsed.diag;
      AddUnique(related, seen, parsed.items);
    }
  }
  return related;
}

absl::StatusOr<std::vector<PairJudgment>> Pipeline::RunEpf(
    const Document& doc, DocumentResult* acc) const {
  std::vector<PairJudgment> out;
  if (doc.entities.size() < 2) return out;

  std::vector<std::pair<int, int>> all = CandidatePairs(doc);
  std::vector<EntityPair> related;
  absl::StatusOr<RenderedPrompt> prompt =
      config_.epf_enumerate_pairs ? renderer_.RenderEpfPairs(doc, all)
                                  : renderer_.RenderEpf(doc);
  if (!prompt.ok()) return prompt.status();
  if (!config_.epf_enumerate_pairs && config_.epf_token_budget > 0 &&
      EstimateTokens(*prompt) > config_.epf_token_budget) {
    absl::StatusOr<std::vector<EntityPair>> chunked = EpfChunked(doc, acc);
    if (!chunked.ok()) return chunked.status();
    related = *std::move(chunked);
  } else {
    absl::StatusOr<std::string> resp =
        Call(prompt->Full(), {TaskKind::kEpf, doc.title, ToEntityPairs(all), {}}, acc);
    if (!resp.ok()) return resp.status();
    ParseResult<EntityPair> parsed = ParseEpf(*resp, doc);
    acc->diagnostics += parsed.diag;
    related = std::move(parsed.items);
  }
  out.reserve(related.size());
  for (const EntityPair& p : related) out.push_back({p.head, p.tail, true});
  return out;
}

absl::StatusOr<std::vector<PredictedTriple>> Pipeline::RunRc(
    const Document& doc, std::span<const EntityPair> pairs,
    DocumentResult* acc) const {
  std::vector<PredictedTriple> out;
  if (pairs.empty()) return out;
  std::vector<std::pair<int, int>> listed = ToStdPairs(pairs);
  absl::StatusOr<RenderedPrompt> prompt = renderer_.RenderRc(doc, listed);
  if (!prompt.ok()) return prompt.status();
  absl::StatusOr<std::string> resp = Call(
      prompt->Full(),
      {TaskKind::kRc, doc.title, std::vector<EntityPair>(pairs.begin(), pairs.end()), {}},
      acc);
  if (!resp.ok()) return resp.status();
  ParseResult<Triple> parsed = ParseRc(*resp, doc, *registry_);
  acc->diagnostics += parsed.diag;
  const std::set<EntityPair> allowed(pairs.begin(), pairs.end());
  for (const Triple& t : parsed.items) {
    if (allowed.count({t.head, t.tail}) == 0) {
      ++acc->counts.rc_off_pair_dropped;
      continue;
    }
    out.push_back({doc.title, t.head, t.tail, t.relation, Stage::kEpf});
  }
  return out;
}

absl::StatusOr<std::vector<PredictedTriple>> Pipeline::RunRm(
    const Document& doc, std::span<const std::string> relations,
    DocumentResult* acc) const {
  std::vector<PredictedTriple> out;
  absl::StatusOr<std::vector<std::string>> codes =
      CanonicalRelationSet(*registry_, relations);
  if (!codes.ok()) return codes.status();
  if (codes->empty()) return out;

  std::vector<std::vector<std::string>> batches;
  if (config_.rm_per_relation) {
    for (const std::string& c : *codes) batches.push_back({c});
  } else {
    batches.push_back(*codes);
  }

  std::vector<HeadCandidate> heads;
  std::vector<TailCandidate> tails;
  std::set<HeadCandidate> seen_heads;
  std::set<TailCandidate> seen_tails;
  for (const auto& batch : batches) {
    absl::StatusOr<RenderedPrompt> hp = renderer_.RenderHead(doc, batch);
    if (!hp.ok()) return hp.status();
    absl::StatusOr<std::string> hresp =
        Call(hp->Full(), {TaskKind::kHead, doc.title, {}, batch}, acc);
    if (!hresp.ok()) return hresp.status();
    ParseResult<HeadCandidate> hparsed = ParseHead(*hresp, doc, *registry_);
    acc->diagnostics += hparsed.diag;
    for (HeadCandidate& h : hparsed.items) {
      if (seen_heads.insert(h).second) heads.push_back(std::move(h));
    }

    absl::StatusOr<RenderedPrompt> tp = renderer_.RenderTail(doc, batch);
    if (!tp.ok()) return tp.status();
    absl::StatusOr<std::string> tresp =
        Call(tp->Full(), {TaskKind::kTail, doc.title, {}, batch}, acc);
    if (!tresp.ok()) return tresp.status();
    ParseResult<TailCandidate> tparsed = ParseTail(*tresp, doc, *registry_);
    acc->diagnostics += tparsed.diag;
    for (TailCandidate& t : tparsed.items) {
      if (seen_tails.insert(t).second) tails.push_back(std::move(t));
    }
  }
  acc->counts.head_candidates += heads.size();
  acc->counts.tail_candidates += tails.size();
  return MergeHeadTail(doc.title, heads, tails);
}

namespace {

void RecordFailure(DocumentResult& r, std::string_view stage,
                   const absl::Status& status) {
  r.complete = false;
  r.errors.push_back(absl::StrCat(Sv(stage), ": ", status.ToString()));
  if (r.failure == absl::StatusCode::kOk) r.failure = status.code();
}

}  // namespace

DocumentResult Pipeline::RunDocument(const Document& doc) const {
  DocumentResult r;
  r.title = doc.title;

  absl::StatusOr<std::vector<PairJudgment>> epf = RunEpf(doc, &r);
  if (!epf.ok()) {
    RecordFailure(r, "epf", epf.status());
    return r;
  }
  for (const PairJudgment& j : *epf) r.epf_pairs.push_back({j.h, j.t});

  absl::StatusOr<std::vector<PredictedTriple>> rc = RunRc(doc, r.epf_pairs, &r);
  if (!rc.ok()) {
    RecordFailure(r, "rc", rc.status());
    return r;
  }
  r.epf_triples = *std::move(rc);

  if (config_.enable_rm) {
    std::vector<std::string> relations;
    std::set<std::string> seen;
    for (const PredictedTriple& t : r.epf_triples) {
      if (seen.insert(t.r).second) relations.push_back(t.r);
    }
    absl::StatusOr<std::vector<PredictedTriple>> rm = RunRm(doc, relations, &r);
    if (rm.ok()) {
      r.rm_triples = *std::move(rm);
    } else {
      RecordFailure(r, "rm", rm.status());
    }
  }

  r.fused_triples = Fuse(r.epf_triples, r.rm_triples, config_.fusion, r.epf_pairs);
  r.counts.epf_pairs = r.epf_pairs.size();
  r.counts.epf_triples = r.epf_triples.size();
  r.counts.rm_triples = r.rm_triples.size();
  r.counts.fused = r.fused_triples.size();
  r.counts.rm_added = static_cast<size_t>(
      std::count_if(r.fused_triples.begin(), r.fused_triples.end(),
                    [](const PredictedTriple& t) { return t.stage == Stage::kRm; }));
  return r;
}

std::vector<DocumentResult> Pipeline::RunAll(std::span<const Document> docs) const {
  std::vector<DocumentResult> results(docs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < docs.size(); i = next++) {
      results[i] = RunDocument(docs[i]);
    }
  };
  const size_t n_workers = std::min<size_t>(
      static_cast<size_t>(config_.max_concurrency), std::max<size_t>(docs.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }
  return results;
}

std::vector<Prediction> CollectPredictions(std::span<const DocumentResult> results) {
  std::vector<Prediction> out;
  for (const DocumentResult& r : results) {
    for (const PredictedTriple& t : r.fused_triples) {
      out.push_back({t.title, t.h, t.t, t.r});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

absl::StatusOr<CorpusSummary> Pipeline::RunCorpus(std::span<const Document> docs,
                                                  const std::string& out_dir) const {
  if (absl::Status s = config_.Validate(); !s.ok()) return s;
  CorpusSummary summary;
  summary.documents = docs.size();
  std::span<const Document> todo = docs;
  if (config_.stop_after > 0 && config_.stop_after < docs.size()) {
    todo = docs.subspan(0, config_.stop_after);
    summary.interrupted = true;
  }
  std::vector<DocumentResult> results = RunAll(todo);
  summary.processed = results.size();
  for (const DocumentResult& r : results) {
    summary.counts += r.counts;
    summary.diagnostics += r.diagnostics;
    if (!r.complete) {
      ++summary.incomplete;
      if (summary.worst_failure == absl::StatusCode::kOk) {
        summary.worst_failure = r.failure;
      }
    }
  }
  if (summary.interrupted) return summary;

  std::vector<Prediction> predictions = CollectPredictions(results);
  summary.predictions = predictions.size();
  std::filesystem::path dir(out_dir);
  if (absl::Status s = WritePredictions(predictions, (dir / "predictions.json").string());
      !s.ok()) {
    return s;
  }
  std::vector<size_t> order(results.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&results](size_t a, size_t b) {
    return results[a].title < results[b].title;
  });
  std::string lines;
  for (size_t i : order) {
    absl::StrAppend(&lines,
                    DocumentResultToJson(results[i]).dump(
                        -1, ' ', false, json::error_handler_t::replace),
                    "\n");
  }
  if (absl::Status s = WriteFileAtomically((dir / "results.jsonl").string(), lines);
      !s.ok()) {
    return s;
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json TriplesToJson(std::span<const PredictedTriple> triples) {
  json arr = json::array();
  for (const PredictedTriple& t : triples) {
    arr.push_back({{"h_idx", t.h}, {"t_idx", t.t}, {"r", t.r},
                   {"stage", StageName(t.stage)}});
  }
  return arr;
}

std::vector<PredictedTriple> TriplesFromJson(const std::string& title,
                                             const json& arr) {
  std::vector<PredictedTriple> out;
  for (const json& e : arr) {
    out.push_back({title, e.at("h_idx").get<int>(), e.at("t_idx").get<int>(),
                   e.at("r").get<std::string>(),
                   e.at("stage").get<std::string>() == "RM" ? Stage::kRm
                                                            : Stage::kEpf});
  }
  return out;
}

}  // namespace

json DocumentResultToJson(const DocumentResult& r) {
  json pairs = json::array();
  for (const EntityPair& p : r.epf_pairs) pairs.push_back({p.head, p.tail});
  const StageCounts& c = r.counts;
  const GroundingDiagnostics& d = r.diagnostics;
  return {{"title", r.title},
          {"complete", r.complete},
          {"errors", r.errors},
          {"failure_code", static_cast<int>(r.failure)},
          {"epf_pairs", std::move(pairs)},
          {"epf_triples", TriplesToJson(r.epf_triples)},
          {"rm_triples", TriplesToJson(r.rm_triples)},
          {"fused_triples", TriplesToJson(r.fused_triples)},
          {"stage_counts",
           {{"epf_pairs", c.epf_pairs},
            {"epf_triples", c.epf_triples},
            {"head_candidates", c.head_candidates},
            {"tail_candidates", c.tail_candidates},
            {"rm_triples", c.rm_triples},
            {"rm_added", c.rm_added},
            {"fused", c.fused},
            {"rc_off_pair_dropped", c.rc_off_pair_dropped},
            {"backend_calls", c.backend_calls}}},
          {"diagnostics",
           {{"malformed_tuples", d.malformed_tuples},
            {"unresolved_entities", d.unresolved_entities},
            {"out_of_set_relations", d.out_of_set_relations},
            {"self_loops_dropped", d.self_loops_dropped},
            {"duplicates_dropped", d.duplicates_dropped}}}};
}

absl::StatusOr<DocumentResult> DocumentResultFromJson(const json& j) {
  try {
    DocumentResult r;
    r.title = j.at("title").get<std::string>();
    r.complete = j.at("complete").get<bool>();
    r.errors = j.at("errors").get<std::vector<std::string>>();
    r.failure = static_cast<absl::StatusCode>(j.value("failure_code", 0));
    for (const json& p : j.at("epf_pairs")) {
      r.epf_pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    }
    r.epf_triples = TriplesFromJson(r.title, j.at("epf_triples"));
    r.rm_triples = TriplesFromJson(r.title, j.at("rm_triples"));
    r.fused_triples = TriplesFromJson(r.title, j.at("fused_triples"));
    const json& c = j.at("stage_counts");
    r.counts.epf_pairs = c.at("epf_pairs").get<size_t>();
    r.counts.epf_triples = c.at("epf_triples").get<size_t>();
    r.counts.head_candidates = c.at("head_candidates").get<size_t>();
    r.counts.tail_candidates = c.at("tail_candidates").get<size_t>();
    r.counts.rm_triples = c.at("rm_triples").get<size_t>();
    r.counts.rm_added = c.at("rm_added").get<size_t>();
    r.counts.fused = c.at("fused").get<size_t>();
    r.counts.rc_off_pair_dropped = c.at("rc_off_pair_dropped").get<size_t>();
    r.counts.backend_calls = c.at("backend_calls").get<size_t>();
    const json& d = j.at("diagnostics");
    r.diagnostics.malformed_tuples = d.at("malformed_tuples").get<size_t>();
    r.diagnostics.unresolved_entities = d.at("unresolved_entities").get<size_t>();
    r.diagnostics.out_of_set_relations = d.at("out_of_set_relations").get<size_t>();
    r.diagnostics.self_loops_dropped = d.at("self_loops_dropped").get<size_t>();
    r.diagnostics.duplicates_dropped = d.at("duplicates_dropped").get<size_t>();
    return r;
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("document result: ", e.what()));
  }
}

}  // namespace relprior
