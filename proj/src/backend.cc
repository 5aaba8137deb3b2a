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

#include "relprior/backend.h"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "string_bridge.h"

namespace relprior {

using nlohmann::json;

absl::Status TaskContext::Validate() const {
  switch (kind) {
    case TaskKind::kEpf:
    case TaskKind::kRc:
      if (!relations.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            Sv(TaskKindName(kind)), " context must carry pairs, not relations"));
      }
      break;
    case TaskKind::kHead:
    case TaskKind::kTail:
      if (!pairs.empty() || relations.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            Sv(TaskKindName(kind)), " context must carry a non-empty relation set"));
      }
      break;
  }
  for (const EntityPair& p : pairs) {
    if (p.head == p.tail || p.head < 0 || p.tail < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid pair (", p.head, ", ", p.tail, ")"));
    }
  }
  return absl::OkStatus();
}

absl::Status DecodingParams::Validate() const {
  if (!(temperature > 0.0 && temperature < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("temperature ", temperature, " outside (0, 1)"));
  }
  if (!(top_p > 0.0 && top_p < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("top_p ", top_p, " outside (0, 1)"));
  }
  if (max_tokens <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("max_tokens ", max_tokens, " must be positive"));
  }
  return absl::OkStatus();
}

absl::Status CompletionRequest::Validate() const {
  if (absl::Status s = decoding.Validate(); !s.ok()) return s;
  return context.Validate();
}

std::string CacheKey(const CompletionRequest& request) {
  // Length-prefixed fields so no two field tuples share an encoding.
  std::string material;
  auto add = [&material](std::string_view field) {
    absl::StrAppend(&material, field.size(), ":", Sv(field), ";");
  };
  add(TaskKindName(request.context.kind));
  add(request.context.doc_title);
  add(request.prompt);
  add(absl::StrFormat("%.17g", request.decoding.temperature));
  add(absl::StrFormat("%.17g", request.decoding.top_p));

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(),
             nullptr);
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    absl::StrAppendFormat(&hex, "%02x", digest[i]);
  }
  return hex;
}

// ---------------------------------------------------------------------------
// RunLog

namespace {

std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

absl::Status RunLog::ReadExisting() {
  if (!std::filesystem::exists(path_)) return absl::OkStatus();
  std::ifstream in(path_, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open run log ", path_));
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    auto corrupt = [&](std::string_view why) {
      return absl::DataLossError(
          absl::StrCat("run log ", path_, " line ", line_no, ": ", Sv(why)));
    };
    if (j.is_discarded()) return corrupt("not valid JSON");
    if (!j.is_object()) return corrupt("not a JSON object");
    for (const char* k : {"key", "kind", "title", "prompt", "response", "ts"}) {
      if (!j.contains(k) || !j[k].is_string()) {
        return corrupt(absl::StrCat("missing string field \"", k, "\""));
      }
    }
    responses_.emplace(j["key"].get<std::string>(),
                       j["response"].get<std::string>());
  }
  return absl::OkStatus();
}

absl::StatusOr<std::unique_ptr<RunLog>> RunLog::Open(const std::string& path) {
  std::unique_ptr<RunLog> log(new RunLog(path));
  if (absl::Status s = log->ReadExisting(); !s.ok()) return s;
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  log->out_.open(path, std::ios::binary | std::ios::app);
  if (!log->out_) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open run log for append: ", path));
  }
  log->writable_ = true;
  return log;
}

absl::StatusOr<std::unique_ptr<RunLog>> RunLog::Load(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    return absl::NotFoundError(absl::StrCat("run log not found: ", path));
  }
  std::unique_ptr<RunLog> log(new RunLog(path));
  if (absl::Status s = log->ReadExisting(); !s.ok()) return s;
  return log;
}

std::optional<std::string> RunLog::Lookup(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = responses_.find(key);
  if (it == responses_.end()) return std::nullopt;
  return it->second;
}

absl::Status RunLog::Append(RunLogEntry entry) {
  if (entry.ts.empty()) entry.ts = UtcTimestamp();
  json j = {{"key", entry.key},       {"kind", entry.kind},
            {"title", entry.title},   {"prompt", entry.prompt},
            {"response", entry.response}, {"ts", entry.ts}};
  std::string line =
      j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  std::lock_guard<std::mutex> lock(mu_);
  if (!writable_) {
    return absl::FailedPreconditionError(
        absl::StrCat("run log opened read-only: ", path_));
  }
  out_ << line;
  out_.flush();
  if (!out_) return absl::DataLossError(absl::StrCat("write failed: ", path_));
  responses_.emplace(std::move(entry.key), std::move(entry.response));
  return absl::OkStatus();
}

size_t RunLog::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return responses_.size();
}

// ---------------------------------------------------------------------------
// Caching / replay

absl::StatusOr<std::string> CachingBackend::Generate(
    const CompletionRequest& request) {
  const std::string key = CacheKey(request);
  if (std::optional<std::string> hit = log_->Lookup(key)) {
    ++hits_;
    return *std::move(hit);
  }
  ++misses_;
  absl::StatusOr<std::string> response = inner_->Generate(request);
  if (!response.ok()) return response;
  absl::Status s = log_->Append({key, std::string(TaskKindName(request.context.kind)),
                                 request.context.doc_title, request.prompt,
                                 *response, ""});
  if (!s.ok()) return s;
  return response;
}

absl::StatusOr<std::string> ReplayBackend::Generate(
    const CompletionRequest& request) {
  const std::string key = CacheKey(request);
  if (std::optional<std::string> hit = log_->Lookup(key)) return *std::move(hit);
  return absl::NotFoundError(absl::StrCat(
      "replay miss for ", Sv(TaskKindName(request.context.kind)), " request on '",
      request.context.doc_title, "' (key ", key, ")"));
}

}  // namespace relprior
