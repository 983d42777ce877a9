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

#ifndef FAIRGFL_OVERLAP_H_
#define FAIRGFL_OVERLAP_H_

#include <span>
#include <utility>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fairgfl/ldp.h"
#include "fairgfl/random.h"

namespace fairgfl {

// Greedy one-to-one matching between two sanitized batches.
struct MatchResult {
  std::vector<std::pair<int, int>> pairs;  // (row in a, row in b)
  int batch_a = 0;
  int batch_b = 0;
  int links_a = 0;       // links in a's corrected adjacency
  int links_b = 0;
  int shared_links = 0;  // matched node pairs linked in both batches

  int num_matches() const { return static_cast<int>(pairs.size()); }
  // Fraction of a's batch that found a partner.
  double node_fraction() const;
  // Fraction of a's links whose endpoints match a link in b; 0 if a has none.
  double link_fraction() const;
  // The same matching seen from b's side.
  MatchResult Reversed() const;
};

// Cross pairs with Euclidean distance <= tau are accepted in ascending
// distance order (ties by row in a, then row in b) when both rows are free.
MatchResult MatchNodes(const SanitizedBatch& a, const SanitizedBatch& b,
                       double tau);

enum class EstimatorMode {
  // Batch fraction scaled by n_i / b_k (nodes) and n_k^2 / b_i^2 (links).
  kCrossScale,
  // Scaled by n_k / b_k and (n_k / b_k)^2; unbiased for the true ratios.
  kCorrected,
  // Node fraction scaled by n_i^2 / (n_k b_k); links as kCorrected.
  kSquaredScale,
};

// Estimate of |V_i ∩ V_k| / n_i from the node match fraction of i's batch,
// clamped to [0, 1].
absl::StatusOr<double> EstimateNodeRatio(double node_fraction, int n_i,
                                         int n_k, int b_i, int b_k,
                                         EstimatorMode mode);

// Estimate of |E_i ∩ E_k| / |E_i| from the link fraction of i's batch,
// clamped to [0, 1].
absl::StatusOr<double> EstimateLinkRatio(double link_fraction, int n_k,
                                         int b_i, int b_k,
                                         EstimatorMode mode);

struct OverlapState {
  Eigen::MatrixXd node_round;
  Eigen::MatrixXd link_round;
  Eigen::MatrixXd node_acc;
  Eigen::MatrixXd link_acc;
  Eigen::MatrixXd overall;  // alpha * node_acc + (1 - alpha) * link_acc
  double alpha = 0.8;
  double beta = 0.5;

  int num_clients() const { return static_cast<int>(overall.rows()); }
};

OverlapState MakeOverlapState(int num_clients, double alpha, double beta);

// One round of server-side estimates; entries are meaningful only where
// `present(i, k)` is set.
struct RoundEstimates {
  Eigen::MatrixXd node;
  Eigen::MatrixXd link;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> present;
};

RoundEstimates EmptyRoundEstimates(int num_clients);

// Folds present pairs into the accumulators with weight beta, leaves the
// rest untouched and recomputes the coupled matrix.
absl::Status UpdateState(OverlapState& state, const RoundEstimates& round);

// Sum of row i of the coupled matrix without the diagonal.
double ClientOverallRatio(const OverlapState& state, int client);

// Matches every pair of uploaded batches and estimates both directions.
absl::StatusOr<RoundEstimates> EstimateFromBatches(
    std::span<const SanitizedBatch> batches, int num_clients, double tau,
    EstimatorMode mode);

enum class ThresholdRule {
  // Quantile of the distance between two independent sanitizations of the
  // same public node.
  kSelfDistance,
  // Quantile of the distance between sanitizations of two different public
  // nodes, i.e. the false-match rate. Each public node is sanitized several
  // times so that small quantiles are resolved.
  kDistinctDistance,
};

absl::StatusOr<double> CalibrateThreshold(
    const Encoder& encoder, const Eigen::MatrixXd& public_features,
    const LdpParams& params, ThresholdRule rule, double quantile, Rng& rng);

}  // namespace fairgfl

#endif  // FAIRGFL_OVERLAP_H_
