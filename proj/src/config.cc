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

#include "relprior/config.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "string_bridge.h"

namespace relprior {

using nlohmann::json;

namespace {

enum class Kind { kString, kInt, kDouble, kBool, kChoice };

// Open or closed numeric bound.
struct Bound {
  double value;
  bool inclusive;
};

struct KeySpec {
  const char* key;
  Kind kind;
  json def;
  std::optional<Bound> lo;
  std::optional<Bound> hi;
  std::vector<std::string> choices;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<KeySpec>& Schema() {
  static const auto* schema = new std::vector<KeySpec>{
      {"paths.data_dir", Kind::kString, "data", {}, {}, {}},
      // Empty: the relation set bundled with the binary.
      {"paths.rel_info", Kind::kString, "", {}, {}, {}},
      // Empty: no alias table; "builtin": the bundled one.
      {"paths.aliases", Kind::kString, "", {}, {}, {}},
      // Empty: built-in prompt templates.
      {"paths.templates", Kind::kString, "", {}, {}, {}},
      {"paths.run_log", Kind::kString, "out/run_log.jsonl", {}, {}, {}},
      {"paths.out_dir", Kind::kString, "out", {}, {}, {}},
      {"backend.kind", Kind::kChoice, "oracle", {}, {}, {"oracle", "http", "replay"}},
      {"backend.endpoint", Kind::kString, "http://localhost:8000/v1", {}, {}, {}},
      {"backend.model", Kind::kString, "relprior", {}, {}, {}},
      {"backend.api_key_env", Kind::kString, "OPENAI_API_KEY", {}, {}, {}},
      {"backend.temperature", Kind::kDouble, 0.1, Bound{0, false}, Bound{1, false}, {}},
      {"backend.top_p", Kind::kDouble, 0.9, Bound{0, false}, Bound{1, false}, {}},
      {"backend.max_tokens", Kind::kInt, 2048, Bound{1, true}, Bound{1 << 20, true}, {}},
      {"backend.max_concurrency", Kind::kInt, 4, Bound{1, true}, Bound{256, true}, {}},
      {"backend.retries", Kind::kInt, 4, Bound{1, true}, Bound{20, true}, {}},
      {"backend.timeout_s", Kind::kInt, 120, Bound{1, true}, Bound{3600, true}, {}},
      {"sampling.neg_ratio", Kind::kDouble, 1.0, Bound{0, true}, Bound{kInf, false}, {}},
      {"sampling.seed", Kind::kInt, 13, Bound{0, true}, Bound{9.0e15, true}, {}},
      {"sampling.mode", Kind::kChoice, "doc", {}, {}, {"doc", "per-pair"}},
      {"pipeline.fusion", Kind::kChoice, "union", {}, {}, {"union", "strict"}},
      {"pipeline.enable_rm", Kind::kBool, true, {}, {}, {}},
      {"pipeline.rm_per_relation", Kind::kBool, false, {}, {}, {}},
      {"pipeline.epf_token_budget", Kind::kInt, 0, Bound{0, true}, Bound{1.0e9, true}, {}},
      {"pipeline.epf_passes", Kind::kInt, 2, Bound{1, true}, Bound{2, true}, {}},
      {"pipeline.epf_enumerate_pairs", Kind::kBool, false, {}, {}, {}},
      {"pipeline.stop_after", Kind::kInt, 0, Bound{0, true}, Bound{1.0e9, true}, {}},
      {"oracle.omission_rate", Kind::kDouble, 0.0, Bound{0, true}, Bound{1, true}, {}},
      {"oracle.spurious_rate", Kind::kDouble, 0.0, Bound{0, true}, Bound{1, true}, {}},
      {"oracle.label_corruption_rate", Kind::kDouble, 0.0, Bound{0, true}, Bound{1, true}, {}},
      {"oracle.seed", Kind::kInt, 1, Bound{0, true}, Bound{9.0e15, true}, {}},
      {"split.docred_train", Kind::kString, "docred/train_annotated.json", {}, {}, {}},
      {"split.docred_dev", Kind::kString, "docred/dev.json", {}, {}, {}},
      {"split.redocred_train", Kind::kString, "re-docred/train_revised.json", {}, {}, {}},
      {"split.redocred_dev", Kind::kString, "re-docred/dev_revised.json", {}, {}, {}},
      {"split.redocred_test", Kind::kString, "re-docred/test_revised.json", {}, {}, {}},
  };
  return *schema;
}

const KeySpec* FindSpec(const std::string& key) {
  for (const KeySpec& s : Schema()) {
    if (key == s.key) return &s;
  }
  return nullptr;
}

bool IsSplitKey(const std::string& key) {
  return key.size() > 6 && key.compare(0, 6, "split.") == 0;
}

std::string RangeText(const KeySpec& s) {
  switch (s.kind) {
    case Kind::kString:
      return "a string";
    case Kind::kBool:
      return "true or false";
    case Kind::kChoice:
      return absl::StrCat("one of ", absl::StrJoin(s.choices, "|"));
    case Kind::kInt:
    case Kind::kDouble: {
      auto num = [](double v) {
        if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
        std::ostringstream os;
        os << v;
        return os.str();
      };
      std::string lo = s.lo ? absl::StrCat(s.lo->inclusive ? "[" : "(", num(s.lo->value))
                            : "(-inf";
      std::string hi = s.hi ? absl::StrCat(num(s.hi->value), s.hi->inclusive ? "]" : ")")
                            : "inf)";
      return absl::StrCat(s.kind == Kind::kInt ? "an integer" : "a number", " in ",
                          lo, ", ", hi);
    }
  }
  return "";
}

bool InRange(const KeySpec& s, double v) {
  if (std::isnan(v)) return false;
  if (s.lo && (s.lo->inclusive ? v < s.lo->value : v <= s.lo->value)) return false;
  if (s.hi && (s.hi->inclusive ? v > s.hi->value : v >= s.hi->value)) return false;
  return true;
}

}  // namespace

AppConfig::AppConfig() {
  for (const KeySpec& s : Schema()) values_[s.key] = s.def;
}

absl::Status AppConfig::Set(const std::string& key, const json& value,
                            const std::string& origin) {
  const KeySpec* spec = FindSpec(key);
  if (spec == nullptr && IsSplitKey(key)) {
    static const KeySpec kSplit{"split.*", Kind::kString, "", {}, {}, {}};
    spec = &kSplit;
  }
  if (spec == nullptr) {
    return absl::InvalidArgumentError(
        absl::StrCat(origin, ": unknown key '", key, "'"));
  }
  auto bad = [&]() {
    return absl::InvalidArgumentError(absl::StrCat(origin, ": ", key, " = ",
                                                   value.dump(), "; expected ",
                                                   RangeText(*spec)));
  };
  switch (spec->kind) {
    case Kind::kString:
      if (!value.is_string()) return bad();
      break;
    case Kind::kBool:
      if (!value.is_boolean()) return bad();
      break;
    case Kind::kChoice:
      if (!value.is_string() ||
          std::find(spec->choices.begin(), spec->choices.end(),
                    value.get<std::string>()) == spec->choices.end()) {
        return bad();
      }
      break;
    case Kind::kInt:
      if (!value.is_number_integer() || !InRange(*spec, value.get<double>())) {
        return bad();
      }
      break;
    case Kind::kDouble:
      if (!value.is_number() || !InRange(*spec, value.get<double>())) return bad();
      break;
  }
  values_[key] = spec->kind == Kind::kDouble ? json(value.get<double>()) : value;
  return absl::OkStatus();
}

absl::Status AppConfig::MergeJson(const json& object, const std::string& origin) {
  if (!object.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(origin, ": configuration must be a JSON object of dotted keys"));
  }
  for (const auto& [key, value] : object.items()) {
    if (absl::Status s = Set(key, value, origin); !s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::Status AppConfig::SetFromString(const std::string& key, const std::string& value) {
  const KeySpec* spec = FindSpec(key);
  const std::string origin = "override";
  if (spec == nullptr || spec->kind == Kind::kString || spec->kind == Kind::kChoice) {
    return Set(key, json(value), origin);
  }
  if (spec->kind == Kind::kBool) {
    if (value == "true" || value == "1") return Set(key, true, origin);
    if (value == "false" || value == "0") return Set(key, false, origin);
    return Set(key, json(value), origin);
  }
  // Numbers go through the JSON parser so "1e-3" and "7" behave as in files.
  json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
  return Set(key, parsed.is_discarded() ? json(value) : parsed, origin);
}

absl::StatusOr<AppConfig> AppConfig::Load(const std::string& path,
                                          const std::vector<std::string>& overrides) {
  AppConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return absl::NotFoundError(absl::StrCat("cannot open config ", path));
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      return absl::InvalidArgumentError(absl::StrCat(path, ": not valid JSON"));
    }
    if (absl::Status s = cfg.MergeJson(j, path); !s.ok()) return s;
  }
  for (const std::string& o : overrides) {
    const size_t eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("override '", o, "': expected key=value"));
    }
    if (absl::Status s = cfg.SetFromString(o.substr(0, eq), o.substr(eq + 1)); !s.ok()) {
      return s;
    }
  }
  return cfg;
}

const std::string& AppConfig::GetString(const std::string& key) const {
  return values_.at(key).get_ref<const std::string&>();
}

int64_t AppConfig::GetInt(const std::string& key) const {
  return values_.at(key).get<int64_t>();
}

double AppConfig::GetDouble(const std::string& key) const {
  return values_.at(key).get<double>();
}

bool AppConfig::GetBool(const std::string& key) const {
  return values_.at(key).get<bool>();
}

json AppConfig::ToJson() const {
  json out = json::object();
  for (const auto& [k, v] : values_) out[k] = v;
  return out;
}

PipelineConfig AppConfig::Pipeline() const {
  PipelineConfig p;
  p.decoding.temperature = GetDouble("backend.temperature");
  p.decoding.top_p = GetDouble("backend.top_p");
  p.decoding.max_tokens = static_cast<int>(GetInt("backend.max_tokens"));
  p.fusion = *ParseFusionMode(GetString("pipeline.fusion"));
  p.epf_token_budget = static_cast<size_t>(GetInt("pipeline.epf_token_budget"));
  p.epf_passes = static_cast<int>(GetInt("pipeline.epf_passes"));
  p.epf_enumerate_pairs = GetBool("pipeline.epf_enumerate_pairs");
  p.rm_per_relation = GetBool("pipeline.rm_per_relation");
  p.enable_rm = GetBool("pipeline.enable_rm");
  p.max_concurrency = static_cast<int>(GetInt("backend.max_concurrency"));
  p.stop_after = static_cast<size_t>(GetInt("pipeline.stop_after"));
  return p;
}

SamplingConfig AppConfig::Sampling() const {
  SamplingConfig s;
  s.neg_ratio = GetDouble("sampling.neg_ratio");
  s.seed = static_cast<uint64_t>(GetInt("sampling.seed"));
  s.mode = *ParseSamplingMode(GetString("sampling.mode"));
  return s;
}

NoiseConfig AppConfig::Noise() const {
  NoiseConfig n;
  n.omission_rate = GetDouble("oracle.omission_rate");
  n.spurious_rate = GetDouble("oracle.spurious_rate");
  n.label_corruption_rate = GetDouble("oracle.label_corruption_rate");
  n.seed = static_cast<uint64_t>(GetInt("oracle.seed"));
  return n;
}

HttpConfig AppConfig::Http() const {
  HttpConfig h;
  h.endpoint = GetString("backend.endpoint");
  h.model = GetString("backend.model");
  h.api_key = ApiKeyFromEnv(GetString("backend.api_key_env"));
  h.timeout_s = static_cast<int>(GetInt("backend.timeout_s"));
  h.max_concurrency = static_cast<int>(GetInt("backend.max_concurrency"));
  h.retry.max_attempts = static_cast<int>(GetInt("backend.retries"));
  return h;
}

std::vector<std::string> AppConfig::SplitNames() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (IsSplitKey(k)) out.push_back(k.substr(6));
  }
  return out;
}

absl::StatusOr<std::string> AppConfig::SplitPath(const std::string& split) const {
  auto it = values_.find("split." + split);
  if (it == values_.end()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown split '", split, "'; expected one of ",
        absl::StrJoin(SplitNames(), "|"), " (or define split.", split, ")"));
  }
  std::filesystem::path p(it->second.get<std::string>());
  if (p.is_relative()) p = std::filesystem::path(GetString("paths.data_dir")) / p;
  return p.string();
}

absl::Status AppConfig::RequireExisting(const std::string& key) const {
  const std::string& path = GetString(key);
  if (!std::filesystem::exists(path)) {
    return absl::NotFoundError(
        absl::StrCat(key, " = \"", path, "\"; expected an existing path"));
  }
  return absl::OkStatus();
}

}  // namespace relprior
