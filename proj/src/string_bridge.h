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

#ifndef RELPRIOR_SRC_STRING_BRIDGE_H_
#define RELPRIOR_SRC_STRING_BRIDGE_H_

#include <string_view>

#include "absl/strings/string_view.h"

namespace relprior {

// The system absl is built with its own string_view type, which does not
// convert implicitly from std::string_view.
inline absl::string_view Sv(std::string_view s) { return {s.data(), s.size()}; }

}  // namespace relprior

#endif  // RELPRIOR_SRC_STRING_BRIDGE_H_
