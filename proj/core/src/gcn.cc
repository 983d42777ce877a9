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

#include "fairgfl/gcn.h"

#include <cmath>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fairgfl {

NormalizedAdjacency NormalizeAdjacency(const Adjacency& adjacency) {
  const int n = adjacency.num_nodes();
  std::vector<double> inv_sqrt_degree(n);
  for (int v = 0; v < n; ++v) {
    inv_sqrt_degree[v] = 1.0 / std::sqrt(1.0 + adjacency.degree(v));
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n + adjacency.num_nonzeros());
  for (int u = 0; u < n; ++u) {
    triplets.emplace_back(u, u, inv_sqrt_degree[u] * inv_sqrt_degree[u]);
    for (int v : adjacency.neighbors(u)) {
      triplets.emplace_back(u, v, inv_sqrt_degree[u] * inv_sqrt_degree[v]);
    }
  }
  NormalizedAdjacency out;
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  return out;
}

GcnModel InitGcnModel(int feature_dim, int hidden_dim, int num_classes,
                      Rng& rng) {
  auto glorot = [&rng](int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
    }
    return m;
  };
  GcnModel model;
  model.w1 = glorot(feature_dim, hidden_dim);
  model.w2 = glorot(hidden_dim, num_classes);
  return model;
}

GcnModel ZerosLike(const GcnModel& model) {
  return {Eigen::MatrixXd::Zero(model.w1.rows(), model.w1.cols()),
          Eigen::MatrixXd::Zero(model.w2.rows(), model.w2.cols())};
}

GcnModel Difference(const GcnModel& a, const GcnModel& b) {
  return {a.w1 - b.w1, a.w2 - b.w2};
}

GcnModel AddScaled(const GcnModel& model, const GcnModel& delta,
                   double scale) {
  return {model.w1 + scale * delta.w1, model.w2 + scale * delta.w2};
}

double SquaredNorm(const GcnModel& model) {
  return model.w1.squaredNorm() + model.w2.squaredNorm();
}

bool AllFinite(const GcnModel& model) {
  return model.w1.allFinite() && model.w2.allFinite();
}

absl::StatusOr<ForwardCache> Forward(const GcnModel& model,
                                     const NormalizedAdjacency& adjacency,
                                     const Eigen::MatrixXd& features) {
  if (features.rows() != adjacency.num_nodes()) {
    return absl::InvalidArgumentError(
        absl::StrCat("features have ", features.rows(), " rows, graph has ",
                     adjacency.num_nodes(), " nodes"));
  }
  if (features.cols() != model.w1.rows() ||
      model.w1.cols() != model.w2.rows()) {
    return absl::InvalidArgumentError("model shape does not match features");
  }
  ForwardCache cache;
  cache.propagated_input = adjacency.matrix * features;
  cache.pre_activation = cache.propagated_input * model.w1;
  cache.hidden = cache.pre_activation.cwiseMax(0.0);
  cache.logits = adjacency.matrix * (cache.hidden * model.w2);
  if (!cache.logits.allFinite()) {
    return absl::InternalError("non-finite value in GCN forward pass");
  }
  return cache;
}

Eigen::MatrixXd LogSoftmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double shift = logits.row(r).maxCoeff();
    const double log_sum =
        std::log((logits.row(r).array() - shift).exp().sum());
    out.row(r) = logits.row(r).array() - shift - log_sum;
  }
  return out;
}

namespace {

absl::Status CheckMask(std::span<const int> labels, std::span<const int> mask,
                       int num_nodes, int num_classes) {
  if (mask.empty()) return absl::InvalidArgumentError("empty loss mask");
  if (static_cast<int>(labels.size()) != num_nodes) {
    return absl::InvalidArgumentError("label count does not match graph");
  }
  for (int v : mask) {
    if (v < 0 || v >= num_nodes) {
      return absl::InvalidArgumentError(
          absl::StrCat("mask node ", v, " out of range"));
    }
    if (labels[v] < 0 || labels[v] >= num_classes) {
      return absl::InvalidArgumentError(
          absl::StrCat("label ", labels[v], " out of range"));
    }
  }
  return absl::OkStatus();
}

double MeanCrossEntropy(const Eigen::MatrixXd& log_probs,
                        std::span<const int> labels,
                        std::span<const int> mask) {
  double total = 0.0;
  for (int v : mask) total -= log_probs(v, labels[v]);
  return total / static_cast<double>(mask.size());
}

}  // namespace

absl::StatusOr<LossAndGradient> LossAndGrad(
    const GcnModel& model, const NormalizedAdjacency& adjacency,
    const Eigen::MatrixXd& features, std::span<const int> labels,
    std::span<const int> mask) {
  if (absl::Status s = CheckMask(labels, mask, adjacency.num_nodes(),
                                 model.num_classes());
      !s.ok()) {
    return s;
  }
  auto cache = Forward(model, adjacency, features);
  if (!cache.ok()) return cache.status();

  const Eigen::MatrixXd log_probs = LogSoftmax(cache->logits);
  LossAndGradient out;
  out.loss = MeanCrossEntropy(log_probs, labels, mask);

  // dL/dlogits is (softmax - onehot) / |mask| on masked rows, zero elsewhere.
  // Repeated mask entries count once per occurrence.
  const double inv = 1.0 / static_cast<double>(mask.size());
  Eigen::MatrixXd d_logits =
      Eigen::MatrixXd::Zero(cache->logits.rows(), cache->logits.cols());
  for (int v : mask) {
    d_logits.row(v) += inv * log_probs.row(v).array().exp().matrix();
    d_logits(v, labels[v]) -= inv;
  }
  // Â is symmetric, so Âᵀ G = Â G.
  const Eigen::MatrixXd d_hidden_w2 = adjacency.matrix * d_logits;
  out.grads.d_w2 = cache->hidden.transpose() * d_hidden_w2;
  Eigen::MatrixXd d_pre = d_hidden_w2 * model.w2.transpose();
  d_pre = (cache->pre_activation.array() > 0.0).select(d_pre, 0.0);
  out.grads.d_w1 = cache->propagated_input.transpose() * d_pre;
  if (!std::isfinite(out.loss) || !out.grads.d_w1.allFinite() ||
      !out.grads.d_w2.allFinite()) {
    return absl::InternalError("non-finite loss or gradient");
  }
  return out;
}

absl::StatusOr<double> MaskedLoss(const GcnModel& model,
                                  const NormalizedAdjacency& adjacency,
                                  const Eigen::MatrixXd& features,
                                  std::span<const int> labels,
                                  std::span<const int> mask) {
  if (absl::Status s = CheckMask(labels, mask, adjacency.num_nodes(),
                                 model.num_classes());
      !s.ok()) {
    return s;
  }
  auto cache = Forward(model, adjacency, features);
  if (!cache.ok()) return cache.status();
  const double loss =
      MeanCrossEntropy(LogSoftmax(cache->logits), labels, mask);
  if (!std::isfinite(loss)) return absl::InternalError("non-finite loss");
  return loss;
}

absl::StatusOr<GcnModel> SgdStep(const GcnModel& model,
                                 const GradientSet& grads, double lr) {
  if (!(lr > 0.0)) {
    return absl::InvalidArgumentError("learning rate must be positive");
  }
  if (grads.d_w1.rows() != model.w1.rows() ||
      grads.d_w1.cols() != model.w1.cols() ||
      grads.d_w2.rows() != model.w2.rows() ||
      grads.d_w2.cols() != model.w2.cols()) {
    return absl::InvalidArgumentError("gradient shape does not match model");
  }
  return GcnModel{model.w1 - lr * grads.d_w1, model.w2 - lr * grads.d_w2};
}

}  // namespace fairgfl
