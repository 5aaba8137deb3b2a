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

#ifndef RELPRIOR_BACKEND_H_
#define RELPRIOR_BACKEND_H_

// Completion engines behind one interface:
//
//   HttpBackend     OpenAI-compatible chat-completions client
//   OracleBackend   answers from gold annotations, with seeded noise
//   ReplayBackend   serves responses from a run log
//   CachingBackend  run-log read-through/write-behind over another engine
//
// Status conventions: kUnavailable is transient (retryable), kNotFound is a
// replay miss, anything else is permanent.

#include <atomic>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "relprior/corpus.h"
#include "relprior/parsing.h"
#include "relprior/prompting.h"

namespace relprior {

// Structured payload of a request, so engines that do not read prompts (the
// oracle) can answer. EPF and RC carry the pairs to judge; HEAD and TAIL
// carry relation codes.
struct TaskContext {
  TaskKind kind = TaskKind::kEpf;
  std::string doc_title;
  std::vector<EntityPair> pairs;
  std::vector<std::string> relations;

  absl::Status Validate() const;
};

struct DecodingParams {
  double temperature = 0.1;
  double top_p = 0.9;
  int max_tokens = 2048;

  absl::Status Validate() const;
};

struct CompletionRequest {
  std::string prompt;
  TaskContext context;
  DecodingParams decoding;

  absl::Status Validate() const;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Safe to call concurrently.
  virtual absl::StatusOr<std::string> Generate(const CompletionRequest& request) = 0;
};

// Hex SHA-256 over (kind, title, prompt, temperature, top_p).
std::string CacheKey(const CompletionRequest& request);

// ---------------------------------------------------------------------------
// Oracle

struct NoiseConfig {
  double omission_rate = 0.0;
  double spurious_rate = 0.0;
  double label_corruption_rate = 0.0;
  uint64_t seed = 0;

  absl::Status Validate() const;
};

// The out-of-registry surface label the oracle emits for a corrupted
// relation, e.g. "nationality" for "country of citizenship".
std::string CorruptedLabel(const RelationRegistry& registry,
                           std::string_view code);

// corrupted label -> code for every registry entry; loading it as the alias
// table undoes label corruption.
std::map<std::string, std::string> CorruptionAliasTable(
    const RelationRegistry& registry);

// Answers every task from the gold triples of the named document.
//
// Noise, drawn from a stream seeded per (seed, title, kind, payload):
//   omission_rate          each gold line is dropped
//   spurious_rate          each non-gold candidate (pair, or entity for
//                          head/tail) is emitted; RC spurious triples get a
//                          uniformly drawn relation
//   label_corruption_rate  each emitted gold relation name is replaced by
//                          CorruptedLabel
class OracleBackend : public Backend {
 public:
  static absl::StatusOr<std::unique_ptr<OracleBackend>> Create(
      std::span<const Document> corpus, const RelationRegistry* registry,
      NoiseConfig noise);

  absl::StatusOr<std::string> Generate(const CompletionRequest& request) override;

 private:
  OracleBackend(std::span<const Document> corpus,
                const RelationRegistry* registry, NoiseConfig noise);

  std::span<const Document> corpus_;
  const RelationRegistry* registry_;
  NoiseConfig noise_;
  std::unordered_map<std::string, size_t> by_title_;
};

// ---------------------------------------------------------------------------
// Run log

struct RunLogEntry {
  std::string key;
  std::string kind;
  std::string title;
  std::string prompt;
  std::string response;
  std::string ts;
};

// Append-only JSONL of {"key","kind","title","prompt","response","ts"}.
// Appends are serialized; lookups are safe from any thread.
class RunLog {
 public:
  // Loads existing entries (the file may be absent) and opens for append.
  // A line that does not parse fails with its 1-based line number.
  static absl::StatusOr<std::unique_ptr<RunLog>> Open(const std::string& path);
  // Read-only view of an existing log.
  static absl::StatusOr<std::unique_ptr<RunLog>> Load(const std::string& path);

  std::optional<std::string> Lookup(const std::string& key) const;
  absl::Status Append(RunLogEntry entry);
  size_t size() const;
  const std::string& path() const { return path_; }

 private:
  explicit RunLog(std::string path) : path_(std::move(path)) {}
  absl::Status ReadExisting();

  std::string path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> responses_;
  std::ofstream out_;
  bool writable_ = false;
};

class CachingBackend : public Backend {
 public:
  CachingBackend(Backend* inner, RunLog* log) : inner_(inner), log_(log) {}

  absl::StatusOr<std::string> Generate(const CompletionRequest& request) override;

  size_t hits() const { return hits_; }
  size_t misses() const { return misses_; }

 private:
  Backend* inner_;
  RunLog* log_;
  std::atomic<size_t> hits_{0};
  std::atomic<size_t> misses_{0};
};

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const RunLog* log) : log_(log) {}
  absl::StatusOr<std::string> Generate(const CompletionRequest& request) override;

 private:
  const RunLog* log_;
};

// ---------------------------------------------------------------------------
// HTTP

struct RetryPolicy {
  int max_attempts = 4;
  int initial_backoff_ms = 500;
  int max_backoff_ms = 8000;
};

struct HttpConfig {
  // Base URL, e.g. "http://localhost:8000/v1"; requests go to
  // {endpoint}/chat/completions.
  std::string endpoint;
  std::string model;
  // Bearer token; empty means no Authorization header.
  std::string api_key;
  int timeout_s = 120;
  int max_concurrency = 4;
  RetryPolicy retry;
};

// Reads the bearer token from `env_var`; empty when unset.
std::string ApiKeyFromEnv(const std::string& env_var);

// Request body for the chat-completions endpoint.
std::string ChatCompletionBody(const std::string& model,
                               const CompletionRequest& request);
// choices[0].message.content of a chat-completions response.
absl::StatusOr<std::string> ExtractCompletionContent(std::string_view body);

class HttpBackend : public Backend {
 public:
  static absl::StatusOr<std::unique_ptr<HttpBackend>> Create(HttpConfig config);

  absl::StatusOr<std::string> Generate(const CompletionRequest& request) override;

  // Total HTTP attempts made, including retries.
  size_t attempts() const { return attempts_; }

 private:
  HttpBackend(HttpConfig config, std::string origin, std::string path);

  HttpConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // base path + "/chat/completions"
  std::counting_semaphore<> in_flight_;
  std::atomic<size_t> attempts_{0};
};

}  // namespace relprior

#endif  // RELPRIOR_BACKEND_H_
