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

#ifndef RELPRIOR_ASSETS_H_
#define RELPRIOR_ASSETS_H_

// Files from assets/ compiled into the library.

#include <string_view>

namespace relprior::assets {

std::string_view RelInfoJson();          // the 96-relation DocRED set
std::string_view RelationAliasesJson();  // corrupted label -> code
std::string_view SelftestDocsJson();     // 5-document fixture
std::string_view EpfTemplate();
std::string_view RcTemplate();
std::string_view HeadTemplate();
std::string_view TailTemplate();

}  // namespace relprior::assets

#endif  // RELPRIOR_ASSETS_H_
