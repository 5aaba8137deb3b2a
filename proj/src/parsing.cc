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

#include "relprior/parsing.h"

#include <set>

namespace relprior {

GroundingDiagnostics& GroundingDiagnostics::operator+=(
    const GroundingDiagnostics& o) {
  malformed_tuples += o.malformed_tuples;
  unresolved_entities += o.unresolved_entities;
  out_of_set_relations += o.out_of_set_relations;
  self_loops_dropped += o.self_loops_dropped;
  duplicates_dropped += o.duplicates_dropped;
  return *this;
}

namespace {

// Alternative splits are only tried for groups with at most this many
// top-level commas; beyond that the default split is used alone.
constexpr size_t kMaxSplitCommas = 8;

bool FillDefaultParts(RawTuple& t) {
  const std::string_view inner = t.inner;
  std::vector<std::string_view> parts;
  if (t.arity == 3) {
    if (t.commas.size() < 2) return false;
    size_t a = t.commas.front(), b = t.commas.back();
    parts = {inner.substr(0, a), inner.substr(a + 1, b - a - 1),
             inner.substr(b + 1)};
  } else if (t.arity == 2) {
    if (t.commas.empty()) return false;
    size_t a = t.commas.front();
    parts = {inner.substr(0, a), inner.substr(a + 1)};
  } else {
    return false;
  }
  for (std::string_view p : parts) {
    std::string_view trimmed = Trim(p);
    if (trimmed.empty()) return false;
    t.parts.emplace_back(trimmed);
  }
  return true;
}

}  // namespace

ExtractResult ExtractTuples(std::string_view text, int expected_arity) {
  ExtractResult out;
  int depth = 0;
  size_t start = 0;
  std::vector<size_t> commas;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '(') {
      if (depth == 0) {
        start = i;
        commas.clear();
      }
      ++depth;
    } else if (c == ')') {
      if (depth == 0) continue;
      if (--depth > 0) continue;
      ++out.groups;
      RawTuple t;
      t.arity = expected_arity;
      t.begin = start;
      t.end = i + 1;
      t.inner = std::string(text.substr(start + 1, i - start - 1));
      t.commas = commas;
      if (FillDefaultParts(t)) {
        out.tuples.push_back(std::move(t));
      } else {
        ++out.diag.malformed_tuples;
      }
    } else if (c == ',' && depth == 1) {
      commas.push_back(i - start - 1);
    }
  }
  if (depth > 0) {
    ++out.groups;
    ++out.diag.malformed_tuples;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grounding

EntityResolver::EntityResolver(const Document& doc) {
  for (const Entity& e : doc.entities) {
    if (e.mentions.empty()) continue;
    representative_.emplace(RepresentativeName(e), e.index);
    for (const Mention& m : e.mentions) {
      exact_.emplace(m.name, e.index);
      folded_.emplace(CaseFold(m.name), e.index);
      collapsed_.emplace(FoldAndCollapse(m.name), e.index);
    }
  }
  // emplace keeps the first insertion, and entities are visited in index
  // order, so every map already holds the lowest index per key.
}

std::optional<int> EntityResolver::Resolve(std::string_view name) const {
  const std::string key(name);
  if (auto it = representative_.find(key); it != representative_.end()) {
    return it->second;
  }
  if (auto it = exact_.find(key); it != exact_.end()) return it->second;
  if (auto it = folded_.find(CaseFold(name)); it != folded_.end()) {
    return it->second;
  }
  if (auto it = collapsed_.find(FoldAndCollapse(name)); it != collapsed_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::optional<int> GroundEntity(std::string_view name, const Document& doc) {
  return EntityResolver(doc).Resolve(name);
}

const RelationId* NormalizeRelation(std::string_view label,
                                    const RelationRegistry& registry) {
  std::string_view l = Trim(label);
  if (const RelationId* r = registry.FindByCode(l)) return r;
  if (const RelationId* r = registry.FindByName(l)) return r;
  if (registry.has_aliases()) return registry.FindByAlias(l);
  return nullptr;
}

// ---------------------------------------------------------------------------
// Task parsers

namespace {

std::string_view Slice(const RawTuple& t, size_t from, size_t to) {
  return Trim(std::string_view(t.inner).substr(from, to - from));
}

// Comma index pairs (i, j), i < j, to split an arity-3 group at: the default
// (first, last) split, then every other pair in order.
std::vector<std::pair<size_t, size_t>> TripleSplits(const RawTuple& t) {
  const size_t n = t.commas.size();
  std::vector<std::pair<size_t, size_t>> out = {{0, n - 1}};
  if (n > kMaxSplitCommas) return out;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      out.emplace_back(i, j);
    }
  }
  return out;
}

struct TripleParts {
  std::string_view head, middle, tail;
};

TripleParts SplitTriple(const RawTuple& t, std::pair<size_t, size_t> split) {
  const size_t a = t.commas[split.first], b = t.commas[split.second];
  return {Slice(t, 0, a), Slice(t, a + 1, b), Slice(t, b + 1, t.inner.size())};
}

// Comma indices for an arity-2 group, first comma first.
std::vector<size_t> PairSplits(const RawTuple& t) {
  const size_t n = t.commas.size();
  if (n > kMaxSplitCommas) return {0};
  std::vector<size_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

std::pair<std::string_view, std::string_view> SplitPair(const RawTuple& t,
                                                         size_t comma) {
  const size_t a = t.commas[comma];
  return {Slice(t, 0, a), Slice(t, a + 1, t.inner.size())};
}

// Shared tail of every parser: self-loop and duplicate filtering in first
// occurrence order.
template <typename T>
void Accept(ParseResult<T>& result, std::set<T>& seen, T item, bool self_loop) {
  if (self_loop) {
    ++result.diag.self_loops_dropped;
    return;
  }
  if (!seen.insert(item).second) {
    ++result.diag.duplicates_dropped;
    return;
  }
  result.items.push_back(std::move(item));
}

}  // namespace

ParseResult<EntityPair> ParseEpf(std::string_view text, const Document& doc) {
  ExtractResult ex = ExtractTuples(text, 3);
  ParseResult<EntityPair> result;
  result.groups = ex.groups;
  result.diag = ex.diag;
  EntityResolver resolver(doc);
  std::set<EntityPair> seen;
  for (const RawTuple& t : ex.tuples) {
    bool has_marker = false;
    std::optional<EntityPair> found;
    for (auto split : TripleSplits(t)) {
      TripleParts p = SplitTriple(t, split);
      if (p.middle != "1" || p.head.empty() || p.tail.empty()) continue;
      has_marker = true;
      std::optional<int> h = resolver.Resolve(p.head);
      std::optional<int> tl = resolver.Resolve(p.tail);
      if (h && tl) {
        found = EntityPair{*h, *tl};
        break;
      }
    }
    if (!has_marker) {
      ++result.diag.malformed_tuples;
    } else if (!found) {
      ++result.diag.unresolved_entities;
    } else {
      Accept(result, seen, *found, found->head == found->tail);
    }
  }
  return result;
}

ParseResult<Triple> ParseRc(std::string_view text, const Document& doc,
                            const RelationRegistry& registry) {
  ExtractResult ex = ExtractTuples(text, 3);
  ParseResult<Triple> result;
  result.groups = ex.groups;
  result.diag = ex.diag;
  EntityResolver resolver(doc);
  std::set<Triple> seen;
  for (const RawTuple& t : ex.tuples) {
    bool relation_known = false;
    std::optional<Triple> found;
    for (auto split : TripleSplits(t)) {
      TripleParts p = SplitTriple(t, split);
      if (p.head.empty() || p.tail.empty()) continue;
      const RelationId* rel = NormalizeRelation(p.middle, registry);
      if (rel == nullptr) continue;
      relation_known = true;
      std::optional<int> h = resolver.Resolve(p.head);
      std::optional<int> tl = resolver.Resolve(p.tail);
      if (h && tl) {
        found = Triple{*h, rel->code, *tl};
        break;
      }
    }
    if (!relation_known) {
      ++result.diag.out_of_set_relations;
    } else if (!found) {
      ++result.diag.unresolved_entities;
    } else {
      Accept(result, seen, *found, found->head == found->tail);
    }
  }
  return result;
}

namespace {

// Head and tail tuples differ only in which side carries the relation.
template <typename T, bool kRelationFirst>
ParseResult<T> ParseMatching(std::string_view text, const Document& doc,
                             const RelationRegistry& registry) {
  ExtractResult ex = ExtractTuples(text, 2);
  ParseResult<T> result;
  result.groups = ex.groups;
  result.diag = ex.diag;
  EntityResolver resolver(doc);
  std::set<T> seen;
  for (const RawTuple& t : ex.tuples) {
    bool relation_known = false;
    std::optional<T> found;
    for (size_t comma : PairSplits(t)) {
      auto [left, right] = SplitPair(t, comma);
      std::string_view rel_text = kRelationFirst ? left : right;
      std::string_view ent_text = kRelationFirst ? right : left;
      if (ent_text.empty()) continue;
      const RelationId* rel = NormalizeRelation(rel_text, registry);
      if (rel == nullptr) continue;
      relation_known = true;
      std::optional<int> e = resolver.Resolve(ent_text);
      if (!e) continue;
      if constexpr (kRelationFirst) {
        found = T{rel->code, *e};
      } else {
        found = T{*e, rel->code};
      }
      break;
    }
    if (!relation_known) {
      ++result.diag.out_of_set_relations;
    } else if (!found) {
      ++result.diag.unresolved_entities;
    } else {
      Accept(result, seen, *found, false);
    }
  }
  return result;
}

}  // namespace

ParseResult<HeadCandidate> ParseHead(std::string_view text, const Document& doc,
                                     const RelationRegistry& registry) {
  return ParseMatching<HeadCandidate, false>(text, doc, registry);
}

ParseResult<TailCandidate> ParseTail(std::string_view text, const Document& doc,
                                     const RelationRegistry& registry) {
  return ParseMatching<TailCandidate, true>(text, doc, registry);
}

}  // namespace relprior
