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

#ifndef RELPRIOR_CONFIG_H_
#define RELPRIOR_CONFIG_H_

// Application configuration: one JSON object with flat dotted keys
// ("backend.temperature": 0.1). Precedence is command-line override, then
// file, then built-in default. Every error names the key and what it
// accepts.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "relprior/backend.h"
#include "relprior/finetune_export.h"
#include "relprior/pipeline.h"

namespace relprior {

class AppConfig {
 public:
  // Defaults only.
  AppConfig();

  // Reads `path` (may be empty for defaults) and applies "key=value"
  // overrides on top.
  static absl::StatusOr<AppConfig> Load(const std::string& path,
                                        const std::vector<std::string>& overrides);

  absl::Status MergeJson(const nlohmann::json& object, const std::string& origin);
  absl::Status SetFromString(const std::string& key, const std::string& value);

  const std::string& GetString(const std::string& key) const;
  int64_t GetInt(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  bool GetBool(const std::string& key) const;

  // Every key with its current value, sorted.
  nlohmann::json ToJson() const;

  // Typed views; values were range-checked when set.
  PipelineConfig Pipeline() const;
  SamplingConfig Sampling() const;
  NoiseConfig Noise() const;
  HttpConfig Http() const;

  // Corpus file for a split name: "split.<name>" resolved against
  // paths.data_dir. Unknown split names are an error listing the known ones.
  absl::StatusOr<std::string> SplitPath(const std::string& split) const;
  std::vector<std::string> SplitNames() const;

  // Checks that a configured path exists; the error names the key.
  absl::Status RequireExisting(const std::string& key) const;

 private:
  absl::Status Set(const std::string& key, const nlohmann::json& value,
                   const std::string& origin);

  std::map<std::string, nlohmann::json> values_;
};

}  // namespace relprior

#endif  // RELPRIOR_CONFIG_H_
