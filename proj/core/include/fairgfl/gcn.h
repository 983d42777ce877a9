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

#ifndef FAIRGFL_GCN_H_
#define FAIRGFL_GCN_H_

#include <span>
#include <vector>

#include "Eigen/Core"
#include "Eigen/SparseCore"
#include "absl/status/statusor.h"
#include "fairgfl/graph.h"
#include "fairgfl/random.h"

namespace fairgfl {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
struct NormalizedAdjacency {
  SparseMatrix matrix;
  int num_nodes() const { return static_cast<int>(matrix.rows()); }
};

NormalizedAdjacency NormalizeAdjacency(const Adjacency& adjacency);

// Two-layer GCN without biases: logits = Â relu(Â X W1) W2.
struct GcnModel {
  Eigen::MatrixXd w1;  // feature_dim x hidden_dim
  Eigen::MatrixXd w2;  // hidden_dim x num_classes

  int feature_dim() const { return static_cast<int>(w1.rows()); }
  int hidden_dim() const { return static_cast<int>(w1.cols()); }
  int num_classes() const { return static_cast<int>(w2.cols()); }

  friend bool operator==(const GcnModel& a, const GcnModel& b) {
    return a.w1.rows() == b.w1.rows() && a.w1.cols() == b.w1.cols() &&
           a.w2.rows() == b.w2.rows() && a.w2.cols() == b.w2.cols() &&
           a.w1 == b.w1 && a.w2 == b.w2;
  }
};

// Glorot-uniform initialization, U(-sqrt(6 / (fan_in + fan_out)), +...).
GcnModel InitGcnModel(int feature_dim, int hidden_dim, int num_classes,
                      Rng& rng);

struct GradientSet {
  Eigen::MatrixXd d_w1;
  Eigen::MatrixXd d_w2;
};

// Parameter-space arithmetic used by optimizers and aggregators.
GcnModel ZerosLike(const GcnModel& model);
// Returns a - b.
GcnModel Difference(const GcnModel& a, const GcnModel& b);
// Returns model + scale * delta.
GcnModel AddScaled(const GcnModel& model, const GcnModel& delta, double scale);
double SquaredNorm(const GcnModel& model);
bool AllFinite(const GcnModel& model);

struct ForwardCache {
  Eigen::MatrixXd propagated_input;  // Â X
  Eigen::MatrixXd pre_activation;    // Â X W1
  Eigen::MatrixXd hidden;            // relu(Â X W1)
  Eigen::MatrixXd logits;            // Â hidden W2
};

absl::StatusOr<ForwardCache> Forward(const GcnModel& model,
                                     const NormalizedAdjacency& adjacency,
                                     const Eigen::MatrixXd& features);

// Row-wise log-softmax with max shift.
Eigen::MatrixXd LogSoftmax(const Eigen::MatrixXd& logits);

struct LossAndGradient {
  double loss = 0.0;
  GradientSet grads;
};

// Mean cross-entropy over the nodes in `mask` and its exact gradient.
// Propagation runs over the full graph; only masked rows enter the loss.
absl::StatusOr<LossAndGradient> LossAndGrad(
    const GcnModel& model, const NormalizedAdjacency& adjacency,
    const Eigen::MatrixXd& features, std::span<const int> labels,
    std::span<const int> mask);

// Loss only, same definition as LossAndGrad.
absl::StatusOr<double> MaskedLoss(const GcnModel& model,
                                  const NormalizedAdjacency& adjacency,
                                  const Eigen::MatrixXd& features,
                                  std::span<const int> labels,
                                  std::span<const int> mask);

absl::StatusOr<GcnModel> SgdStep(const GcnModel& model,
                                 const GradientSet& grads, double lr);

}  // namespace fairgfl

#endif  // FAIRGFL_GCN_H_
