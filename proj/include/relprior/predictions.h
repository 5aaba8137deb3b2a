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

#ifndef RELPRIOR_PREDICTIONS_H_
#define RELPRIOR_PREDICTIONS_H_

// DocRED submission format: a JSON array of
// {"title", "h_idx", "t_idx", "r"} objects.

#include <compare>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace relprior {

struct Prediction {
  std::string title;
  int h = 0;
  int t = 0;
  std::string r;
  friend auto operator<=>(const Prediction&, const Prediction&) = default;
};

// One object per line; the caller decides the order.
std::string SerializePredictions(std::span<const Prediction> predictions);
absl::StatusOr<std::vector<Prediction>> ParsePredictions(const std::string& text);

absl::Status WritePredictions(std::span<const Prediction> predictions,
                              const std::string& path);
absl::StatusOr<std::vector<Prediction>> ReadPredictions(const std::string& path);

// Writes `contents` to path via a temporary file and rename.
absl::Status WriteFileAtomically(const std::string& path,
                                 const std::string& contents);

}  // namespace relprior

#endif  // RELPRIOR_PREDICTIONS_H_
