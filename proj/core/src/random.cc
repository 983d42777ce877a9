// Copyright 2026 The FairGFL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairgfl/random.h"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace fairgfl {

Rng MakeRng(std::uint64_t seed, Stream stream,
            std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  auto push64 = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push64(seed);
  push64(static_cast<std::uint64_t>(stream));
  for (std::uint64_t v : path) push64(v);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

std::vector<double> SampleDirichlet(double alpha, int k, Rng& rng) {
  std::vector<double> out(k, 0.0);
  if (k <= 0) return out;
  std::gamma_distribution<double> gamma(alpha, 1.0);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    out[i] = gamma(rng);
    total += out[i];
  }
  if (total <= 0.0) {
    // Every gamma draw underflowed (tiny alpha); fall back to a vertex.
    std::uniform_int_distribution<int> pick(0, k - 1);
    out[pick(rng)] = 1.0;
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<int> SampleWithoutReplacement(int n, int k, Rng& rng) {
  k = std::clamp(k, 0, n);
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

double UniformUnit(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace fairgfl
