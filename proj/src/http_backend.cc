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

// TLS support comes from the CPPHTTPLIB_OPENSSL_SUPPORT definition on the
// library target, so every translation unit sees the same httplib layout.
#include "httplib.h"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "relprior/backend.h"

namespace relprior {

using nlohmann::json;

std::string ApiKeyFromEnv(const std::string& env_var) {
  if (env_var.empty()) return "";
  const char* v = std::getenv(env_var.c_str());
  return v == nullptr ? "" : v;
}

std::string ChatCompletionBody(const std::string& model,
                               const CompletionRequest& request) {
  json body = {
      {"model", model},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.decoding.temperature},
      {"top_p", request.decoding.top_p},
      {"max_tokens", request.decoding.max_tokens}};
  return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

absl::StatusOr<std::string> ExtractCompletionContent(std::string_view body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InternalError("completion response is not a JSON object");
  }
  const json* content = nullptr;
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const json& choice = j["choices"][0];
    if (choice.contains("message") && choice["message"].is_object() &&
        choice["message"].contains("content")) {
      content = &choice["message"]["content"];
    }
  }
  if (content == nullptr) {
    return absl::InternalError(
        "completion response has no choices[0].message.content");
  }
  if (content->is_null()) return std::string();
  if (!content->is_string()) {
    return absl::InternalError("choices[0].message.content is not a string");
  }
  return content->get<std::string>();
}

namespace {

// Splits "scheme://host[:port]/base/path" into origin and path.
absl::Status SplitEndpoint(const std::string& endpoint, std::string* origin,
                           std::string* base_path) {
  const size_t scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    return absl::InvalidArgumentError(absl::StrCat(
        "backend.endpoint '", endpoint, "' must start with http:// or https://"));
  }
  const std::string scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    return absl::InvalidArgumentError(
        absl::StrCat("backend.endpoint: unsupported scheme '", scheme, "'"));
  }
  const size_t path_start = endpoint.find('/', scheme_end + 3);
  *origin = endpoint.substr(0, path_start);
  *base_path = path_start == std::string::npos ? "" : endpoint.substr(path_start);
  while (!base_path->empty() && base_path->back() == '/') base_path->pop_back();
  if (origin->size() <= scheme_end + 3) {
    return absl::InvalidArgumentError(
        absl::StrCat("backend.endpoint '", endpoint, "' has no host"));
  }
  return absl::OkStatus();
}

bool IsRetryableStatus(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(HttpConfig config, std::string origin, std::string path)
    : config_(std::move(config)),
      origin_(std::move(origin)),
      path_(std::move(path)),
      in_flight_(config_.max_concurrency) {}

absl::StatusOr<std::unique_ptr<HttpBackend>> HttpBackend::Create(
    HttpConfig config) {
  std::string origin, base;
  if (absl::Status s = SplitEndpoint(config.endpoint, &origin, &base); !s.ok()) {
    return s;
  }
  if (config.model.empty()) {
    return absl::InvalidArgumentError("backend.model must be set for the http engine");
  }
  if (config.max_concurrency < 1) {
    return absl::InvalidArgumentError("backend.max_concurrency must be >= 1");
  }
  if (config.retry.max_attempts < 1) {
    return absl::InvalidArgumentError("backend.retries must be >= 1");
  }
  return std::unique_ptr<HttpBackend>(
      new HttpBackend(std::move(config), origin, base + "/chat/completions"));
}

absl::StatusOr<std::string> HttpBackend::Generate(const CompletionRequest& request) {
  if (absl::Status s = request.Validate(); !s.ok()) return s;
  const std::string body = ChatCompletionBody(config_.model, request);

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<>* sem;
    ~Release() { sem->release(); }
  } release{&in_flight_};

  httplib::Client client(origin_);
  client.set_connection_timeout(std::min(config_.timeout_s, 30), 0);
  client.set_read_timeout(config_.timeout_s, 0);
  client.set_write_timeout(config_.timeout_s, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  std::string last_error;
  int backoff_ms = config_.retry.initial_backoff_ms;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    ++attempts_;
    httplib::Result res = client.Post(path_, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) {
      return ExtractCompletionContent(res->body);
    }
    if (res && !IsRetryableStatus(res->status)) {
      return absl::InternalError(absl::StrCat(
          "POST ", origin_, path_, " returned HTTP ", res->status, ": ",
          res->body.substr(0, 300)));
    }
    last_error = res ? absl::StrCat("HTTP ", res->status)
                     : absl::StrCat("transport error: ", httplib::to_string(res.error()));
    if (attempt < config_.retry.max_attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms = std::min(backoff_ms * 2, config_.retry.max_backoff_ms);
    }
  }
  return absl::UnavailableError(absl::StrCat(
      "POST ", origin_, path_, " failed after ", config_.retry.max_attempts,
      " attempts: ", last_error));
}

}  // namespace relprior
