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

#include "relprior/finetune_export.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"
#include "relprior/predictions.h"
#include "relprior/random.h"
#include "string_bridge.h"

namespace relprior {

using nlohmann::json;

absl::StatusOr<SamplingMode> ParseSamplingMode(std::string_view name) {
  if (name == "doc" || name == "document") return SamplingMode::kDocument;
  if (name == "per-pair" || name == "pair") return SamplingMode::kPerPair;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown sampling mode '", Sv(name), "' (expected doc|per-pair)"));
}

std::string_view SamplingModeName(SamplingMode mode) {
  return mode == SamplingMode::kDocument ? "doc" : "per-pair";
}

absl::Status SamplingConfig::Validate() const {
  if (!(neg_ratio >= 0.0) || !std::isfinite(neg_ratio)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sampling.neg_ratio = ", neg_ratio, "; expected a finite value >= 0"));
  }
  return absl::OkStatus();
}

std::vector<std::pair<int, int>> GoldPairs(const Document& doc) {
  std::set<std::pair<int, int>> pairs;
  for (const GoldTriple& g : doc.gold) pairs.emplace(g.h, g.t);
  return {pairs.begin(), pairs.end()};
}

std::vector<std::pair<int, int>> SampleEpfPairs(const Document& doc,
                                                const SamplingConfig& cfg,
                                                bool* short_negatives) {
  std::vector<std::pair<int, int>> positives = GoldPairs(doc);
  const std::set<std::pair<int, int>> related(positives.begin(), positives.end());
  std::vector<std::pair<int, int>> pool;
  for (const auto& p : CandidatePairs(doc)) {
    if (related.count(p) == 0) pool.push_back(p);
  }
  const size_t want = static_cast<size_t>(
      std::floor(cfg.neg_ratio * static_cast<double>(positives.size())));
  if (short_negatives != nullptr) *short_negatives = want > pool.size();
  StableRng rng(MixSeed(cfg.seed, absl::StrCat("epf-sample/", doc.title)));
  std::vector<std::pair<int, int>> out = std::move(positives);
  for (const auto& p : rng.Sample(std::move(pool), want)) out.push_back(p);
  rng.Shuffle(out);
  return out;
}

namespace {

// Gold codes must be known to the registry.
absl::Status CheckRelations(const Document& doc, const RelationRegistry& registry) {
  for (const GoldTriple& g : doc.gold) {
    if (registry.FindByCode(g.r) == nullptr) {
      return absl::InvalidArgumentError(absl::StrCat(
          "document '", doc.title, "': relation ", g.r, " is not in the registry"));
    }
  }
  return absl::OkStatus();
}

const std::string& Name(const Document& doc, int i) {
  return RepresentativeName(doc.entities[i]);
}

InstructionRecord MakeRecord(const Document& doc, RenderedPrompt prompt,
                             std::vector<std::string> lines) {
  return {std::move(prompt.instruction), std::move(prompt.input),
          absl::StrJoin(lines, "\n"), doc.title};
}

std::vector<std::string> GoldCodes(const Document& doc) {
  std::vector<std::string> codes;
  for (const GoldTriple& g : doc.gold) codes.push_back(g.r);
  return codes;
}

}  // namespace

absl::StatusOr<ExportResult> BuildEpfDataset(std::span<const Document> docs,
                                             const PromptRenderer& renderer,
                                             const SamplingConfig& cfg) {
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  ExportResult out;
  for (const Document& doc : docs) {
    if (doc.entities.empty()) {
      ++out.diag.no_entities;
      continue;
    }
    if (doc.gold.empty()) {
      ++out.diag.no_triples;
      continue;
    }
    bool short_negatives = false;
    const std::vector<std::pair<int, int>> pairs =
        SampleEpfPairs(doc, cfg, &short_negatives);
    if (short_negatives) ++out.diag.short_negatives;
    const std::vector<std::pair<int, int>> gold = GoldPairs(doc);
    const std::set<std::pair<int, int>> related(gold.begin(), gold.end());

    if (cfg.mode == SamplingMode::kDocument) {
      absl::StatusOr<RenderedPrompt> prompt = renderer.RenderEpfPairs(doc, pairs);
      if (!prompt.ok()) return prompt.status();
      std::vector<std::string> lines;
      for (const auto& [h, t] : gold) {
        lines.push_back(FormatEpfLine(Name(doc, h), Name(doc, t)));
      }
      out.records.push_back(MakeRecord(doc, *std::move(prompt), std::move(lines)));
      continue;
    }
    for (const auto& p : pairs) {
      const std::pair<int, int> one[] = {p};
      absl::StatusOr<RenderedPrompt> prompt = renderer.RenderEpfPairs(doc, one);
      if (!prompt.ok()) return prompt.status();
      std::string target =
          related.count(p) > 0
              ? FormatEpfLine(Name(doc, p.first), Name(doc, p.second))
              : FormatTripleLine(Name(doc, p.first), "0", Name(doc, p.second));
      out.records.push_back(MakeRecord(doc, *std::move(prompt), {std::move(target)}));
    }
  }
  return out;
}

absl::StatusOr<ExportResult> BuildRcDataset(std::span<const Document> docs,
                                            const PromptRenderer& renderer) {
  const RelationRegistry& registry = renderer.registry();
  ExportResult out;
  for (const Document& doc : docs) {
    if (doc.gold.empty()) {
      ++out.diag.no_triples;
      continue;
    }
    if (absl::Status s = CheckRelations(doc, registry); !s.ok()) return s;
    std::set<std::tuple<int, int, size_t>> triples;
    for (const GoldTriple& g : doc.gold) {
      triples.emplace(g.h, g.t, *registry.IndexOf(g.r));
    }
    const std::vector<std::pair<int, int>> pairs = GoldPairs(doc);
    absl::StatusOr<RenderedPrompt> prompt = renderer.RenderRc(doc, pairs);
    if (!prompt.ok()) return prompt.status();
    std::vector<std::string> lines;
    for (const auto& [h, t, r] : triples) {
      lines.push_back(FormatTripleLine(Name(doc, h), registry.entries()[r].name,
                                       Name(doc, t)));
    }
    out.records.push_back(MakeRecord(doc, *std::move(prompt), std::move(lines)));
  }
  return out;
}

namespace {

// Head (entity = h) or tail (entity = t) projection of the gold set, sorted
// by entity index then registry order.
absl::StatusOr<ExportResult> BuildMatchingDataset(std::span<const Document> docs,
                                                  const PromptRenderer& renderer,
                                                  TaskKind kind) {
  const RelationRegistry& registry = renderer.registry();
  ExportResult out;
  for (const Document& doc : docs) {
    if (doc.gold.empty()) {
      ++out.diag.no_triples;
      continue;
    }
    if (absl::Status s = CheckRelations(doc, registry); !s.ok()) return s;
    std::set<std::pair<int, size_t>> projection;
    for (const GoldTriple& g : doc.gold) {
      projection.emplace(kind == TaskKind::kHead ? g.h : g.t, *registry.IndexOf(g.r));
    }
    const std::vector<std::string> codes = GoldCodes(doc);
    absl::StatusOr<RenderedPrompt> prompt = kind == TaskKind::kHead
                                                ? renderer.RenderHead(doc, codes)
                                                : renderer.RenderTail(doc, codes);
    if (!prompt.ok()) return prompt.status();
    std::vector<std::string> lines;
    for (const auto& [e, r] : projection) {
      const std::string& rel = registry.entries()[r].name;
      lines.push_back(kind == TaskKind::kHead ? FormatHeadLine(Name(doc, e), rel)
                                              : FormatTailLine(rel, Name(doc, e)));
    }
    out.records.push_back(MakeRecord(doc, *std::move(prompt), std::move(lines)));
  }
  return out;
}

}  // namespace

absl::StatusOr<ExportResult> BuildHeadDataset(std::span<const Document> docs,
                                              const PromptRenderer& renderer) {
  return BuildMatchingDataset(docs, renderer, TaskKind::kHead);
}

absl::StatusOr<ExportResult> BuildTailDataset(std::span<const Document> docs,
                                              const PromptRenderer& renderer) {
  return BuildMatchingDataset(docs, renderer, TaskKind::kTail);
}

std::string SerializeJsonl(std::span<const InstructionRecord> records) {
  std::string out;
  for (const InstructionRecord& r : records) {
    json j = {{"instruction", r.instruction}, {"input", r.input}, {"output", r.output}};
    absl::StrAppend(&out, j.dump(-1, ' ', false, json::error_handler_t::replace), "\n");
  }
  return out;
}

absl::Status WriteJsonl(std::span<const InstructionRecord> records,
                        const std::string& path) {
  return WriteFileAtomically(path, SerializeJsonl(records));
}

}  // namespace relprior
