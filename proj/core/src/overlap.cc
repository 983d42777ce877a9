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

#include "fairgfl/overlap.h"

#include <algorithm>
#include <cmath>
#include <span>
#include <tuple>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fairgfl {

double MatchResult::node_fraction() const {
  return batch_a == 0 ? 0.0 : static_cast<double>(pairs.size()) / batch_a;
}

double MatchResult::link_fraction() const {
  return links_a == 0 ? 0.0 : static_cast<double>(shared_links) / links_a;
}

MatchResult MatchResult::Reversed() const {
  MatchResult r;
  r.pairs.reserve(pairs.size());
  for (const auto& [x, y] : pairs) r.pairs.emplace_back(y, x);
  std::sort(r.pairs.begin(), r.pairs.end());
  r.batch_a = batch_b;
  r.batch_b = batch_a;
  r.links_a = links_b;
  r.links_b = links_a;
  r.shared_links = shared_links;
  return r;
}

namespace {

int CountLinks(const BitMatrix& adjacency) {
  int count = 0;
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j) {
      count += adjacency(i, j) ? 1 : 0;
    }
  }
  return count;
}

}  // namespace

MatchResult MatchNodes(const SanitizedBatch& a, const SanitizedBatch& b,
                       double tau) {
  MatchResult result;
  result.batch_a = a.batch_size();
  result.batch_b = b.batch_size();
  result.links_a = CountLinks(a.adjacency);
  result.links_b = CountLinks(b.adjacency);

  std::vector<std::tuple<double, int, int>> candidates;
  for (int i = 0; i < a.batch_size(); ++i) {
    for (int j = 0; j < b.batch_size(); ++j) {
      const double d = (a.nodes.row(i) - b.nodes.row(j)).norm();
      if (d <= tau) candidates.emplace_back(d, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<char> used_a(a.batch_size(), 0), used_b(b.batch_size(), 0);
  for (const auto& [d, i, j] : candidates) {
    if (used_a[i] || used_b[j]) continue;
    used_a[i] = used_b[j] = 1;
    result.pairs.emplace_back(i, j);
  }
  std::sort(result.pairs.begin(), result.pairs.end());

  for (size_t x = 0; x < result.pairs.size(); ++x) {
    for (size_t y = x + 1; y < result.pairs.size(); ++y) {
      const auto [ai, bi] = result.pairs[x];
      const auto [aj, bj] = result.pairs[y];
      if (a.adjacency(ai, aj) && b.adjacency(bi, bj)) ++result.shared_links;
    }
  }
  return result;
}

absl::StatusOr<double> EstimateNodeRatio(double node_fraction, int n_i,
                                         int n_k, int b_i, int b_k,
                                         EstimatorMode mode) {
  if (b_k <= 0 || b_i <= 0) {
    return absl::InvalidArgumentError("batch sizes must be positive");
  }
  if (b_i > n_i || b_k > n_k) {
    return absl::InvalidArgumentError("batch larger than client");
  }
  double scale = 0.0;
  switch (mode) {
    case EstimatorMode::kCrossScale:
      scale = static_cast<double>(n_i) / b_k;
      break;
    case EstimatorMode::kCorrected:
      scale = static_cast<double>(n_k) / b_k;
      break;
    case EstimatorMode::kSquaredScale:
      scale = static_cast<double>(n_i) * n_i /
              (static_cast<double>(n_k) * b_k);
      break;
  }
  return std::clamp(node_fraction * scale, 0.0, 1.0);
}

absl::StatusOr<double> EstimateLinkRatio(double link_fraction, int n_k,
                                         int b_i, int b_k,
                                         EstimatorMode mode) {
  if (b_i <= 0 || b_k <= 0) {
    return absl::InvalidArgumentError("batch sizes must be positive");
  }
  double ratio = 0.0;
  if (mode == EstimatorMode::kCrossScale) {
    ratio = static_cast<double>(n_k) / b_i;
  } else {
    ratio = static_cast<double>(n_k) / b_k;
  }
  return std::clamp(link_fraction * ratio * ratio, 0.0, 1.0);
}

OverlapState MakeOverlapState(int num_clients, double alpha, double beta) {
  OverlapState s;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(num_clients, num_clients);
  s.node_round = s.link_round = s.node_acc = s.link_acc = s.overall = zero;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

RoundEstimates EmptyRoundEstimates(int num_clients) {
  RoundEstimates r;
  r.node = Eigen::MatrixXd::Zero(num_clients, num_clients);
  r.link = Eigen::MatrixXd::Zero(num_clients, num_clients);
  r.present.setConstant(num_clients, num_clients, false);
  return r;
}

absl::Status UpdateState(OverlapState& state, const RoundEstimates& round) {
  const int p = state.num_clients();
  if (round.node.rows() != p || round.node.cols() != p ||
      round.link.rows() != p || round.link.cols() != p ||
      round.present.rows() != p || round.present.cols() != p) {
    return absl::InvalidArgumentError("round estimates have wrong shape");
  }
  const double beta = state.beta;
  for (int i = 0; i < p; ++i) {
    for (int k = 0; k < p; ++k) {
      if (i == k || !round.present(i, k)) continue;
      state.node_round(i, k) = round.node(i, k);
      state.link_round(i, k) = round.link(i, k);
      state.node_acc(i, k) =
          beta * round.node(i, k) + (1.0 - beta) * state.node_acc(i, k);
      state.link_acc(i, k) =
          beta * round.link(i, k) + (1.0 - beta) * state.link_acc(i, k);
    }
  }
  state.overall =
      state.alpha * state.node_acc + (1.0 - state.alpha) * state.link_acc;
  return absl::OkStatus();
}

double ClientOverallRatio(const OverlapState& state, int client) {
  double total = 0.0;
  for (int k = 0; k < state.num_clients(); ++k) {
    if (k != client) total += state.overall(client, k);
  }
  return total;
}

absl::StatusOr<RoundEstimates> EstimateFromBatches(
    std::span<const SanitizedBatch> batches, int num_clients, double tau,
    EstimatorMode mode) {
  RoundEstimates out = EmptyRoundEstimates(num_clients);
  for (size_t x = 0; x < batches.size(); ++x) {
    for (size_t y = x + 1; y < batches.size(); ++y) {
      const SanitizedBatch& a = batches[x];
      const SanitizedBatch& b = batches[y];
      if (a.client_id < 0 || a.client_id >= num_clients ||
          b.client_id < 0 || b.client_id >= num_clients ||
          a.client_id == b.client_id) {
        return absl::InvalidArgumentError("bad client id in uploads");
      }
      if (a.batch_size() == 0 || b.batch_size() == 0) continue;
      const MatchResult ab = MatchNodes(a, b, tau);
      const MatchResult ba = ab.Reversed();
      for (const auto& [m, s, t] :
           {std::tuple{&ab, &a, &b}, std::tuple{&ba, &b, &a}}) {
        auto node = EstimateNodeRatio(m->node_fraction(), s->reported_n,
                                      t->reported_n, s->batch_size(),
                                      t->batch_size(), mode);
        if (!node.ok()) return node.status();
        auto link = EstimateLinkRatio(m->link_fraction(), t->reported_n,
                                      s->batch_size(), t->batch_size(), mode);
        if (!link.ok()) return link.status();
        out.node(s->client_id, t->client_id) = *node;
        out.link(s->client_id, t->client_id) = *link;
        out.present(s->client_id, t->client_id) = true;
      }
    }
  }
  return out;
}

constexpr int kDistinctPasses = 10;

absl::StatusOr<double> CalibrateThreshold(
    const Encoder& encoder, const Eigen::MatrixXd& public_features,
    const LdpParams& params, ThresholdRule rule, double quantile, Rng& rng) {
  if (!(quantile >= 0.0 && quantile <= 1.0)) {
    return absl::InvalidArgumentError("quantile must be in [0, 1]");
  }
  const int n = static_cast<int>(public_features.rows());
  if (n < 2) return absl::InvalidArgumentError("need >= 2 public nodes");
  const Eigen::MatrixXd encoded = encoder.EncodeRaw(public_features);
  const int passes = rule == ThresholdRule::kSelfDistance ? 2 : kDistinctPasses;
  std::vector<Eigen::MatrixXd> draws(passes,
                                     Eigen::MatrixXd(n, encoder.output_dim()));
  for (int pass = 0; pass < passes; ++pass) {
    for (int r = 0; r < n; ++r) {
      auto s = PerturbNode(encoded.row(r), encoder.x_min, encoder.x_max,
                           params, rng);
      if (!s.ok()) return s.status();
      draws[pass].row(r) = *s;
    }
  }
  std::vector<double> distances;
  if (rule == ThresholdRule::kSelfDistance) {
    for (int r = 0; r < n; ++r) {
      distances.push_back((draws[0].row(r) - draws[1].row(r)).norm());
    }
  } else {
    // Every pair of draws that belong to different nodes.
    for (int pa = 0; pa < passes; ++pa) {
      for (int r = 0; r < n; ++r) {
        for (int pb = pa; pb < passes; ++pb) {
          for (int s = pb == pa ? r + 1 : 0; s < n; ++s) {
            if (s == r) continue;
            distances.push_back(
                (draws[pa].row(r) - draws[pb].row(s)).norm());
          }
        }
      }
    }
  }
  std::sort(distances.begin(), distances.end());
  // Nearest-rank quantile.
  const auto rank = static_cast<size_t>(
      std::ceil(quantile * static_cast<double>(distances.size())));
  return distances[rank == 0 ? 0 : rank - 1];
}

}  // namespace fairgfl
