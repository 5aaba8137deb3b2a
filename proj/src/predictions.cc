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

#include "relprior/predictions.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace relprior {

using nlohmann::json;

std::string SerializePredictions(std::span<const Prediction> predictions) {
  std::string out = "[";
  for (size_t i = 0; i < predictions.size(); ++i) {
    const Prediction& p = predictions[i];
    json j = {{"title", p.title}, {"h_idx", p.h}, {"t_idx", p.t}, {"r", p.r}};
    absl::StrAppend(&out, i == 0 ? "\n" : ",\n",
                    j.dump(-1, ' ', false, json::error_handler_t::replace));
  }
  out += predictions.empty() ? "]\n" : "\n]\n";
  return out;
}

absl::StatusOr<std::vector<Prediction>> ParsePredictions(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_array()) {
    return absl::InvalidArgumentError("predictions must be a JSON array");
  }
  std::vector<Prediction> out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    try {
      out.push_back({e.at("title").get<std::string>(), e.at("h_idx").get<int>(),
                     e.at("t_idx").get<int>(), e.at("r").get<std::string>()});
    } catch (const std::exception& ex) {
      return absl::InvalidArgumentError(
          absl::StrCat("prediction ", i, ": ", ex.what()));
    }
  }
  return out;
}

absl::Status WriteFileAtomically(const std::string& path,
                                 const std::string& contents) {
  std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", tmp));
    out << contents;
    out.flush();
    if (!out) return absl::DataLossError(absl::StrCat("write failed: ", tmp));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("rename ", tmp, " -> ", path, ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::Status WritePredictions(std::span<const Prediction> predictions,
                              const std::string& path) {
  return WriteFileAtomically(path, SerializePredictions(predictions));
}

absl::StatusOr<std::vector<Prediction>> ReadPredictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  absl::StatusOr<std::vector<Prediction>> p = ParsePredictions(buf.str());
  if (!p.ok()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": ", p.status().message()));
  }
  return p;
}

}  // namespace relprior
