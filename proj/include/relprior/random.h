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

#ifndef RELPRIOR_RANDOM_H_
#define RELPRIOR_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace relprior {

// 64-bit FNV-1a. Used to derive per-document seed streams; stable across
// platforms, unlike std::hash.
uint64_t Fnv1a64(std::string_view data,
                 uint64_t basis = 0xcbf29ce484222325ULL);

// Derives an independent seed from a base seed and a salt string.
uint64_t MixSeed(uint64_t seed, std::string_view salt);

// Deterministic random source. std::mt19937_64 has a standardized output
// sequence; the std distributions do not, so bounded draws and shuffles are
// implemented here.
class StableRng {
 public:
  explicit StableRng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  uint64_t Below(uint64_t bound);

  // Uniform real in [0, 1) with 53 bits of precision.
  double Uniform();

  bool Bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return Uniform() < p;
  }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(Below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  // k distinct elements drawn uniformly from pool (partial Fisher-Yates);
  // returned in draw order.
  template <typename T>
  std::vector<T> Sample(std::vector<T> pool, size_t k) {
    if (k > pool.size()) k = pool.size();
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + static_cast<size_t>(Below(pool.size() - i));
      using std::swap;
      swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace relprior

#endif  // RELPRIOR_RANDOM_H_
