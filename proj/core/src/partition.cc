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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fairgfl/graph.h"
#include "fairgfl/random.h"

// Overlapping federated partition.
//
// 1. Eligible nodes are shuffled and split into an overlap pool (fraction r)
//    and a non-overlap pool.
// 2. For every label, non-overlap nodes are dealt to clients disjointly in
//    proportions drawn from Dirichlet(alpha_nonoverlap).
// 3. For every label, Dirichlet(alpha_overlap) shares over clients, times
//    N / (r - N r), times the label's pool size give each client's demand.
//    Demands are multiplied by a calibration factor (see ExpectedAverage),
//    capped at the label's pool size, and sampled without replacement
//    independently per client, so a pool node may land on several clients.

namespace fairgfl {
namespace {

struct OverlapPlan {
  // base[i][c]: uncapped demand of client i for label c before calibration.
  std::vector<std::vector<double>> base;
  std::vector<int> pool_sizes;  // per label
  std::vector<int> own_sizes;   // non-overlap nodes per client
};

std::vector<std::vector<double>> Demands(const OverlapPlan& plan,
                                         double factor) {
  std::vector<std::vector<double>> d = plan.base;
  for (auto& row : d) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = std::min(static_cast<double>(plan.pool_sizes[c]),
                        factor * row[c]);
    }
  }
  return d;
}

// Expected average node overlap ratio when client i draws d[i][c] nodes
// uniformly from a label pool of size s_c: E|V_i ∩ V_k| = sum_c d_ic d_kc / s_c.
double ExpectedAverage(const OverlapPlan& plan, double factor) {
  const auto d = Demands(plan, factor);
  const int p = static_cast<int>(d.size());
  if (p < 2) return 0.0;
  double total = 0.0;
  for (int i = 0; i < p; ++i) {
    double size = plan.own_sizes[i];
    for (double v : d[i]) size += v;
    if (size <= 0.0) continue;
    double row = 0.0;
    for (int k = 0; k < p; ++k) {
      if (k == i) continue;
      for (std::size_t c = 0; c < d[i].size(); ++c) {
        if (plan.pool_sizes[c] > 0) {
          row += d[i][c] * d[k][c] / plan.pool_sizes[c];
        }
      }
    }
    total += row / size / (p - 1);
  }
  return total / p;
}

double CalibrationFactor(const OverlapPlan& plan, double target) {
  double hi = 1.0;
  double previous = -1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double value = ExpectedAverage(plan, hi);
    if (value >= target || value == previous) break;
    previous = value;
    hi *= 2.0;
  }
  if (ExpectedAverage(plan, hi) < target) return hi;  // unreachable: saturate
  double lo = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (ExpectedAverage(plan, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

std::vector<double> Multipliers(const PartitionSpec& spec) {
  std::vector<double> g(spec.num_clients, 1.0);
  if (spec.profile == OverlapProfile::kTiered) {
    for (int i = 0; i < spec.num_clients; ++i) {
      g[i] = static_cast<double>((i * 3) / spec.num_clients);
    }
  }
  return g;
}

}  // namespace

absl::Status ValidatePartitionSpec(const PartitionSpec& spec) {
  if (spec.num_clients < 1) {
    return absl::InvalidArgumentError("num_clients must be >= 1");
  }
  if (!(spec.overlap >= 0.0 && spec.overlap < 1.0)) {
    return absl::InvalidArgumentError("overlap must lie in [0, 1)");
  }
  if (!(spec.pool_fraction > 0.0 && spec.pool_fraction <= 1.0)) {
    return absl::InvalidArgumentError("pool_fraction must lie in (0, 1]");
  }
  if (!(spec.dirichlet_alpha_nonoverlap > 0.0) ||
      !(spec.dirichlet_alpha_overlap > 0.0)) {
    return absl::InvalidArgumentError("Dirichlet concentrations must be > 0");
  }
  if (spec.min_client_nodes < 0) {
    return absl::InvalidArgumentError("min_client_nodes must be >= 0");
  }
  if (spec.overlap > 0.0) {
    const double scale = OverlapScale(spec);
    if (!std::isfinite(scale) || !(scale > 0.0)) {
      return absl::InvalidArgumentError("overlap scaling factor not finite");
    }
  }
  return absl::OkStatus();
}

double OverlapScale(const PartitionSpec& spec) {
  const double r = spec.pool_fraction;
  return spec.overlap / (r - spec.overlap * r);
}

absl::StatusOr<std::vector<ClientSubgraph>> Partition(
    const GlobalGraph& graph, const PartitionSpec& spec,
    std::span<const int> eligible) {
  if (absl::Status s = ValidatePartitionSpec(spec); !s.ok()) return s;
  if (graph.num_nodes() == 0) {
    return absl::InvalidArgumentError("cannot partition an empty graph");
  }
  std::vector<int> nodes;
  if (eligible.empty()) {
    nodes.resize(graph.num_nodes());
    std::iota(nodes.begin(), nodes.end(), 0);
  } else {
    nodes.assign(eligible.begin(), eligible.end());
    std::vector<int> sorted = nodes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
        sorted.front() < 0 || sorted.back() >= graph.num_nodes()) {
      return absl::InvalidArgumentError(
          "eligible nodes must be unique ids of the graph");
    }
  }
  const int p = spec.num_clients;
  const int m = static_cast<int>(nodes.size());
  if (p > m) {
    return absl::InvalidArgumentError(absl::StrCat(
        "more clients (", p, ") than partitionable nodes (", m, ")"));
  }

  Rng rng = MakeRng(spec.seed, Stream::kPartition);
  {
    const std::vector<int> order = SampleWithoutReplacement(m, m, rng);
    std::vector<int> shuffled(m);
    for (int i = 0; i < m; ++i) shuffled[i] = nodes[order[i]];
    nodes = std::move(shuffled);
  }
  const int pool_size = static_cast<int>(std::lround(spec.pool_fraction * m));
  const int num_classes = graph.num_classes;
  std::vector<std::vector<int>> pool(num_classes), rest(num_classes);
  for (int i = 0; i < m; ++i) {
    const int v = nodes[i];
    (i < pool_size ? pool : rest)[graph.labels[v]].push_back(v);
  }

  std::vector<std::vector<int>> members(p);
  constexpr int kMaxAttempts = 1000;
  bool satisfied = false;
  for (int attempt = 0; attempt < kMaxAttempts && !satisfied; ++attempt) {
    for (auto& list : members) list.clear();
    for (int c = 0; c < num_classes; ++c) {
      const auto& bucket = rest[c];
      if (bucket.empty()) continue;
      const std::vector<double> shares =
          SampleDirichlet(spec.dirichlet_alpha_nonoverlap, p, rng);
      const int len = static_cast<int>(bucket.size());
      double cumulative = 0.0;
      int begin = 0;
      for (int i = 0; i < p; ++i) {
        cumulative += shares[i];
        const int end = i + 1 == p
                            ? len
                            : std::min(len, static_cast<int>(cumulative * len));
        for (int j = begin; j < end; ++j) members[i].push_back(bucket[j]);
        begin = std::max(begin, end);
      }
    }
    satisfied = std::all_of(
        members.begin(), members.end(), [&](const std::vector<int>& list) {
          return static_cast<int>(list.size()) >= spec.min_client_nodes;
        });
  }
  if (!satisfied) {
    return absl::FailedPreconditionError(absl::StrCat(
        "could not give every client at least ", spec.min_client_nodes,
        " non-overlap nodes"));
  }

  if (spec.overlap > 0.0 && p > 1 && pool_size > 0) {
    const double scale = OverlapScale(spec);
    const std::vector<double> multiplier = Multipliers(spec);
    OverlapPlan plan;
    plan.base.assign(p, std::vector<double>(num_classes, 0.0));
    for (int c = 0; c < num_classes; ++c) {
      plan.pool_sizes.push_back(static_cast<int>(pool[c].size()));
      if (pool[c].empty()) continue;
      const std::vector<double> shares =
          SampleDirichlet(spec.dirichlet_alpha_overlap, p, rng);
      for (int i = 0; i < p; ++i) {
        plan.base[i][c] = multiplier[i] * shares[i] * scale * pool[c].size();
      }
    }
    for (const auto& list : members) {
      plan.own_sizes.push_back(static_cast<int>(list.size()));
    }
    const double factor =
        spec.calibrate_overlap ? CalibrationFactor(plan, spec.overlap) : 1.0;
    const auto demands = Demands(plan, factor);
    for (int i = 0; i < p; ++i) {
      for (int c = 0; c < num_classes; ++c) {
        const int available = static_cast<int>(pool[c].size());
        const int want = std::min(
            available, static_cast<int>(std::lround(demands[i][c])));
        for (int j : SampleWithoutReplacement(available, want, rng)) {
          members[i].push_back(pool[c][j]);
        }
      }
    }
  }

  std::vector<ClientSubgraph> parts;
  parts.reserve(p);
  for (int i = 0; i < p; ++i) {
    auto sub = MakeClientSubgraph(graph, i, std::move(members[i]));
    if (!sub.ok()) return sub.status();
    parts.push_back(*std::move(sub));
  }
  return parts;
}

}  // namespace fairgfl
