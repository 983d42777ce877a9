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

#ifndef FAIRGFL_RANDOM_H_
#define FAIRGFL_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fairgfl {

using Rng = std::mt19937_64;

// Stream tags keep independent consumers of one experiment seed from sharing
// a generator. Results must not depend on the order in which streams are
// created, so every stream is derived from the seed and its tag path alone.
enum class Stream : std::uint64_t {
  kPartition = 1,
  kSbm = 2,
  kSplit = 3,
  kModelInit = 4,
  kEncoder = 5,
  kThreshold = 6,
  kClientSampling = 7,
  kLocalTraining = 8,
  kSanitize = 9,
  kUploadBatch = 10,
};

// Returns a generator seeded from `seed` and a path of stream identifiers,
// e.g. MakeRng(seed, {Stream::kLocalTraining, round, client_id}).
Rng MakeRng(std::uint64_t seed, Stream stream,
            std::initializer_list<std::uint64_t> path = {});

// Draws one point from a symmetric Dirichlet(alpha) over `k` categories.
std::vector<double> SampleDirichlet(double alpha, int k, Rng& rng);

// Returns `k` distinct indices from [0, n) in sampling order.
std::vector<int> SampleWithoutReplacement(int n, int k, Rng& rng);

// Uniform double in [0, 1).
double UniformUnit(Rng& rng);

}  // namespace fairgfl

#endif  // FAIRGFL_RANDOM_H_
