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
#include <numeric>
#include <vector>

#include "benchmark/benchmark.h"
#include "fairgfl/gcn.h"
#include "fairgfl/graph.h"
#include "fairgfl/ldp.h"
#include "fairgfl/overlap.h"
#include "fairgfl/random.h"

namespace fairgfl {
namespace {

GlobalGraph Sbm(int nodes_per_block) {
  SbmSpec spec;
  spec.nodes_per_block = nodes_per_block;
  return *GenerateSbm(spec);
}

void BM_GcnLossAndGrad(benchmark::State& state) {
  const GlobalGraph g = Sbm(static_cast<int>(state.range(0)));
  const NormalizedAdjacency a = NormalizeAdjacency(g.adjacency);
  Rng rng = MakeRng(0, Stream::kModelInit);
  const GcnModel m = InitGcnModel(g.feature_dim(), 16, g.num_classes, rng);
  std::vector<int> mask(g.num_nodes());
  std::iota(mask.begin(), mask.end(), 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(LossAndGrad(m, a, g.features, g.labels, mask));
  }
  state.SetItemsProcessed(state.iterations() * g.num_nodes());
}
BENCHMARK(BM_GcnLossAndGrad)->Arg(20)->Arg(60)->Arg(200);

void BM_GcnForward(benchmark::State& state) {
  const GlobalGraph g = Sbm(static_cast<int>(state.range(0)));
  const NormalizedAdjacency a = NormalizeAdjacency(g.adjacency);
  Rng rng = MakeRng(0, Stream::kModelInit);
  const GcnModel m = InitGcnModel(g.feature_dim(), 16, g.num_classes, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Forward(m, a, g.features));
  state.SetItemsProcessed(state.iterations() * g.num_nodes());
}
BENCHMARK(BM_GcnForward)->Arg(20)->Arg(60)->Arg(200);

void BM_PerturbNode(benchmark::State& state) {
  LdpParams params;
  params.quantiles = static_cast<int>(state.range(0));
  Rng rng = MakeRng(0, Stream::kSanitize);
  Eigen::RowVectorXd x(16);
  for (int i = 0; i < 16; ++i) x(i) = UniformUnit(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(PerturbNode(x, 0.0, 1.0, params, rng));
  }
}
BENCHMARK(BM_PerturbNode)->Arg(8)->Arg(64);

void BM_MatchNodes(benchmark::State& state) {
  const int b = static_cast<int>(state.range(0));
  Rng rng = MakeRng(0, Stream::kSanitize);
  auto batch = [&] {
    SanitizedBatch s;
    s.nodes.resize(b, 16);
    for (int i = 0; i < b; ++i) {
      for (int j = 0; j < 16; ++j) s.nodes(i, j) = (rng() % 9) / 8.0;
    }
    s.adjacency = BitMatrix::Zero(b, b);
    s.reported_n = 4 * b;
    return s;
  };
  const SanitizedBatch x = batch(), y = batch();
  for (auto _ : state) benchmark::DoNotOptimize(MatchNodes(x, y, 0.9));
}
BENCHMARK(BM_MatchNodes)->Arg(16)->Arg(64)->Arg(256);

void BM_Partition(benchmark::State& state) {
  const GlobalGraph g = Sbm(60);
  PartitionSpec spec;
  spec.overlap = 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(Partition(g, spec));
}
BENCHMARK(BM_Partition);

}  // namespace
}  // namespace fairgfl

BENCHMARK_MAIN();
