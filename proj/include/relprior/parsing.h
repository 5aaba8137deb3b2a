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

#ifndef RELPRIOR_PARSING_H_
#define RELPRIOR_PARSING_H_

// Turns raw model output into grounded facts.
//
// Every parser is total: any byte string is accepted, and whatever cannot be
// used is counted in GroundingDiagnostics. For every call
//
//   items.size() + diag.Drops() == groups
//
// where `groups` is the number of top-level parenthesized groups in the text.

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relprior/corpus.h"

namespace relprior {

struct EntityPair {
  int head = 0;
  int tail = 0;
  friend auto operator<=>(const EntityPair&, const EntityPair&) = default;
};

struct Triple {
  int head = 0;
  std::string relation;  // P-code
  int tail = 0;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct HeadCandidate {
  int entity = 0;
  std::string relation;
  friend auto operator<=>(const HeadCandidate&, const HeadCandidate&) = default;
};

struct TailCandidate {
  std::string relation;
  int entity = 0;
  friend auto operator<=>(const TailCandidate&, const TailCandidate&) = default;
};

struct GroundingDiagnostics {
  size_t malformed_tuples = 0;
  size_t unresolved_entities = 0;
  size_t out_of_set_relations = 0;
  size_t self_loops_dropped = 0;
  size_t duplicates_dropped = 0;

  size_t Drops() const {
    return malformed_tuples + unresolved_entities + out_of_set_relations +
           self_loops_dropped + duplicates_dropped;
  }
  GroundingDiagnostics& operator+=(const GroundingDiagnostics& o);
  friend bool operator==(const GroundingDiagnostics&,
                         const GroundingDiagnostics&) = default;
};

// One parenthesized group with the arity's comma structure.
struct RawTuple {
  int arity = 0;
  // Trimmed parts of the default split: first and last top-level comma for
  // arity 3, first top-level comma for arity 2.
  std::vector<std::string> parts;
  // Byte offsets of the group in the raw text, parentheses included.
  size_t begin = 0;
  size_t end = 0;
  // Text between the parentheses and the offsets of its top-level commas.
  // Parsers use these to re-split names that themselves contain commas.
  std::string inner;
  std::vector<size_t> commas;
};

struct ExtractResult {
  std::vector<RawTuple> tuples;
  GroundingDiagnostics diag;  // only malformed_tuples is used
  size_t groups = 0;
};

// Scans for top-level "(...)" groups; commas nested in inner parentheses do
// not split. A group needs at least arity-1 top-level commas and non-empty
// default parts, otherwise it is counted malformed. Unterminated groups are
// malformed; prose outside groups is ignored.
ExtractResult ExtractTuples(std::string_view text, int expected_arity);

// Maps surface names to entity indices. Resolution order: exact
// representative name, exact mention name, case-folded mention name,
// case-folded with whitespace collapsed. Ties go to the lowest index.
class EntityResolver {
 public:
  explicit EntityResolver(const Document& doc);
  std::optional<int> Resolve(std::string_view name) const;

 private:
  std::unordered_map<std::string, int> representative_;
  std::unordered_map<std::string, int> exact_;
  std::unordered_map<std::string, int> folded_;
  std::unordered_map<std::string, int> collapsed_;
};

std::optional<int> GroundEntity(std::string_view name, const Document& doc);

// Exact P-code, then case-folded name, then alias table (when loaded).
const RelationId* NormalizeRelation(std::string_view label,
                                    const RelationRegistry& registry);

template <typename T>
struct ParseResult {
  std::vector<T> items;
  GroundingDiagnostics diag;
  size_t groups = 0;
};

// "(head, 1, tail)" lines. The middle field must be exactly "1".
ParseResult<EntityPair> ParseEpf(std::string_view text, const Document& doc);
// "(head, relation, tail)" lines.
ParseResult<Triple> ParseRc(std::string_view text, const Document& doc,
                            const RelationRegistry& registry);
// "(entity, relation)" lines.
ParseResult<HeadCandidate> ParseHead(std::string_view text, const Document& doc,
                                     const RelationRegistry& registry);
// "(relation, entity)" lines.
ParseResult<TailCandidate> ParseTail(std::string_view text, const Document& doc,
                                     const RelationRegistry& registry);

}  // namespace relprior

#endif  // RELPRIOR_PARSING_H_
