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

#ifndef RELPRIOR_CORPUS_H_
#define RELPRIOR_CORPUS_H_

// DocRED-schema documents, the predefined relation set, and corpus
// statistics.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace relprior {

// ASCII case folding; DocRED labels and names are compared this way.
std::string CaseFold(std::string_view s);

// Case-folds and collapses runs of whitespace to a single space, trimming
// both ends.
std::string FoldAndCollapse(std::string_view s);

// Strips leading and trailing ASCII whitespace.
std::string_view Trim(std::string_view s);

// True iff `code` is "P" followed by one or more digits.
bool IsRelationCode(std::string_view code);

struct RelationId {
  std::string code;
  std::string name;

  friend bool operator==(const RelationId&, const RelationId&) = default;
};

// The predefined relation set. Entries keep file order (sorted by numeric
// P-code when loaded from a JSON object). Lookups are by exact code, by
// case-folded name and, when an alias table is attached, by case-folded
// alias.
class RelationRegistry {
 public:
  RelationRegistry() = default;

  static absl::StatusOr<RelationRegistry> Create(
      std::vector<RelationId> entries);

  // Attaches surface-label -> code aliases. Every target code must exist.
  absl::Status SetAliases(const std::map<std::string, std::string>& aliases);

  const std::vector<RelationId>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool has_aliases() const { return !alias_index_.empty(); }

  const RelationId* FindByCode(std::string_view code) const;
  const RelationId* FindByName(std::string_view name) const;
  const RelationId* FindByAlias(std::string_view label) const;

  // Position of `code` in entries(); nullopt if absent.
  std::optional<size_t> IndexOf(std::string_view code) const;

  // Name for a known code. The code must be present.
  const std::string& NameOf(std::string_view code) const;

 private:
  std::vector<RelationId> entries_;
  std::unordered_map<std::string, size_t> code_index_;
  std::unordered_map<std::string, size_t> name_index_;
  std::unordered_map<std::string, size_t> alias_index_;
};

absl::StatusOr<RelationRegistry> ParseRelationRegistry(
    const nlohmann::json& rel_info);
absl::StatusOr<std::map<std::string, std::string>> ParseAliasTable(
    const nlohmann::json& aliases);

// Loads a relation-info JSON object (P-code -> name) and, optionally, an
// alias JSON object (label -> P-code).
absl::StatusOr<RelationRegistry> LoadRelationRegistry(
    const std::string& path, const std::optional<std::string>& alias_path);

struct Mention {
  std::string name;
  int sent_id = 0;
  int start = 0;  // half-open token span [start, end)
  int end = 0;
  std::string type;

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct Entity {
  int index = 0;
  std::vector<Mention> mentions;

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct GoldTriple {
  int h = 0;
  int t = 0;
  std::string r;
  std::vector<int> evidence;

  friend bool operator==(const GoldTriple&, const GoldTriple&) = default;
};

struct Document {
  std::string title;
  std::vector<std::vector<std::string>> sents;
  std::vector<Entity> entities;
  std::vector<GoldTriple> gold;

  friend bool operator==(const Document&, const Document&) = default;
};

// Longest mention name of the entity; ties go to the first occurrence.
const std::string& RepresentativeName(const Entity& entity);

// Sentences joined with single spaces, in order.
std::string DocumentText(const Document& doc);

struct LoadOptions {
  // Require a "labels" array on every record.
  bool expect_gold = true;
  // Drop invalid records (counted) instead of failing.
  bool permissive = false;
  // When set, gold relation codes must be present in it.
  const RelationRegistry* registry = nullptr;
};

struct LoadedCorpus {
  std::vector<Document> docs;
  size_t dropped = 0;
  std::vector<std::string> drop_reasons;
};

absl::StatusOr<LoadedCorpus> ParseCorpus(const nlohmann::json& records,
                                         const LoadOptions& options);
absl::StatusOr<LoadedCorpus> LoadCorpus(const std::string& path,
                                        const LoadOptions& options);

// Checks every structural invariant of a document; the message names the
// title and the offending field.
absl::Status ValidateDocument(const Document& doc,
                              const RelationRegistry* registry);

// Serializes back to the DocRED record schema.
nlohmann::json DocumentToJson(const Document& doc);
nlohmann::json CorpusToJson(std::span<const Document> docs);

// All ordered pairs (h, t), h != t, in lexicographic order.
std::vector<std::pair<int, int>> CandidatePairs(const Document& doc);

struct CorpusStats {
  size_t n_docs = 0;
  double mean_entities = 0.0;
  double mean_sentences = 0.0;
  double mean_triples = 0.0;
};

absl::StatusOr<CorpusStats> ComputeCorpusStats(std::span<const Document> docs);

}  // namespace relprior

#endif  // RELPRIOR_CORPUS_H_
