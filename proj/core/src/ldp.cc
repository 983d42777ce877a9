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

#include "fairgfl/ldp.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fairgfl {

Eigen::MatrixXd Encoder::EncodeRaw(const Eigen::MatrixXd& features) const {
  Eigen::MatrixXd standardized =
      (features.rowwise() - input_mean).array().rowwise() /
      input_scale.array();
  Eigen::MatrixXd pre = (standardized * weight).rowwise() + bias;
  return pre.array().tanh().matrix();
}

Eigen::MatrixXd Encoder::Encode(const Eigen::MatrixXd& features) const {
  return EncodeRaw(features).cwiseMax(x_min).cwiseMin(x_max);
}

double Autoencoder::ReconstructionMse(const Eigen::MatrixXd& features) const {
  const Eigen::MatrixXd target =
      (features.rowwise() - encoder.input_mean).array().rowwise() /
      encoder.input_scale.array();
  const Eigen::MatrixXd recon =
      (encoder.EncodeRaw(features) * decoder_weight).rowwise() + decoder_bias;
  return (recon - target).squaredNorm() / static_cast<double>(target.size());
}

namespace {

Eigen::MatrixXd GlorotUniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

}  // namespace

absl::StatusOr<Autoencoder> TrainAutoencoder(
    const Eigen::MatrixXd& public_features,
    const EncoderTrainingOptions& options) {
  const int n = static_cast<int>(public_features.rows());
  const int f = static_cast<int>(public_features.cols());
  const int d = options.output_dim;
  if (n == 0) return absl::InvalidArgumentError("no public nodes");
  if (d < 1 || d >= f) {
    return absl::InvalidArgumentError(absl::StrCat(
        "encoder dimension ", d, " must be in [1, feature_dim=", f, ")"));
  }
  if (options.epochs < 0 || options.batch_size < 1 || !(options.lr > 0.0)) {
    return absl::InvalidArgumentError("invalid encoder training options");
  }
  if (!public_features.allFinite()) {
    return absl::InvalidArgumentError("non-finite public features");
  }

  Autoencoder ae;
  Encoder& enc = ae.encoder;
  enc.input_mean = public_features.colwise().mean();
  const Eigen::MatrixXd centered =
      public_features.rowwise() - enc.input_mean;
  enc.input_scale =
      (centered.colwise().squaredNorm() / static_cast<double>(n))
          .array()
          .sqrt()
          .unaryExpr([](double s) { return s > 1e-12 ? s : 1.0; })
          .matrix();
  const Eigen::MatrixXd data =
      centered.array().rowwise() / enc.input_scale.array();

  Rng rng = MakeRng(options.seed, Stream::kEncoder);
  enc.weight = GlorotUniform(f, d, rng);
  enc.bias = Eigen::RowVectorXd::Zero(d);
  ae.decoder_weight = GlorotUniform(d, f, rng);
  ae.decoder_bias = Eigen::RowVectorXd::Zero(f);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += options.batch_size) {
      const int m = std::min(options.batch_size, n - start);
      Eigen::MatrixXd x(m, f);
      for (int r = 0; r < m; ++r) x.row(r) = data.row(order[start + r]);
      const Eigen::MatrixXd h =
          ((x * enc.weight).rowwise() + enc.bias).array().tanh().matrix();
      const Eigen::MatrixXd recon =
          (h * ae.decoder_weight).rowwise() + ae.decoder_bias;
      const Eigen::MatrixXd d_recon =
          (recon - x) * (2.0 / (static_cast<double>(m) * f));
      const Eigen::MatrixXd d_h = d_recon * ae.decoder_weight.transpose();
      const Eigen::MatrixXd d_pre =
          d_h.array() * (1.0 - h.array().square());
      ae.decoder_weight -= options.lr * (h.transpose() * d_recon);
      ae.decoder_bias -= options.lr * d_recon.colwise().sum();
      enc.weight -= options.lr * (x.transpose() * d_pre);
      enc.bias -= options.lr * d_pre.colwise().sum();
    }
  }

  const Eigen::MatrixXd z = enc.EncodeRaw(public_features);
  const double lo = z.minCoeff();
  const double hi = z.maxCoeff();
  const double pad = hi > lo ? 0.05 * (hi - lo) : 0.05;
  enc.x_min = lo - pad;
  enc.x_max = hi + pad;
  if (!enc.weight.allFinite() || !ae.decoder_weight.allFinite()) {
    return absl::InternalError("encoder training diverged");
  }
  return ae;
}

absl::StatusOr<Encoder> TrainEncoder(const Eigen::MatrixXd& public_features,
                                     const EncoderTrainingOptions& options) {
  auto ae = TrainAutoencoder(public_features, options);
  if (!ae.ok()) return ae.status();
  return std::move(ae->encoder);
}

double LdpParams::flip_probability() const {
  if (!enabled) return 0.0;
  return 1.0 / (1.0 + std::exp(epsilon_b));
}

absl::Status ValidateLdpParams(const LdpParams& params) {
  if (params.quantiles < 1) {
    return absl::InvalidArgumentError("quantiles must be >= 1");
  }
  if (!params.enabled) return absl::OkStatus();
  if (!(params.epsilon_a > 0.0) || !std::isfinite(params.epsilon_a)) {
    return absl::InvalidArgumentError("epsilon_a must be positive and finite");
  }
  if (!(params.epsilon_b > 0.0) || !std::isfinite(params.epsilon_b)) {
    return absl::InvalidArgumentError("epsilon_b must be positive and finite");
  }
  return absl::OkStatus();
}

std::vector<double> NodeOutputProbabilities(double x_hat, double epsilon_a,
                                            int quantiles) {
  const int p = quantiles;
  std::vector<double> weights(p + 1);
  double total = 0.0;
  for (int i = 0; i <= p; ++i) {
    const double steps =
        std::floor(p * std::abs(x_hat - static_cast<double>(i) / p) + 1e-12);
    // Shifted by -epsilon_a so the largest weight is 1.
    weights[i] = std::exp(-epsilon_a * steps / p);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return weights;
}

absl::StatusOr<Eigen::RowVectorXd> PerturbNode(
    const Eigen::RowVectorXd& encoded, double x_min, double x_max,
    const LdpParams& params, Rng& rng) {
  if (!encoded.allFinite()) {
    return absl::InvalidArgumentError("non-finite encoded value");
  }
  if (!(x_max > x_min)) {
    return absl::InvalidArgumentError("empty clamp range");
  }
  if (absl::Status s = ValidateLdpParams(params); !s.ok()) return s;
  const int p = params.quantiles;
  Eigen::RowVectorXd out(encoded.size());
  for (Eigen::Index d = 0; d < encoded.size(); ++d) {
    const double x_hat =
        (std::clamp(encoded[d], x_min, x_max) - x_min) / (x_max - x_min);
    int chosen;
    if (!params.enabled) {
      chosen = static_cast<int>(std::lround(x_hat * p));
    } else {
      const std::vector<double> probs =
          NodeOutputProbabilities(x_hat, params.epsilon_a, p);
      const double u = UniformUnit(rng);
      double cumulative = 0.0;
      chosen = p;
      for (int i = 0; i <= p; ++i) {
        cumulative += probs[i];
        if (u < cumulative) {
          chosen = i;
          break;
        }
      }
    }
    out[d] = static_cast<double>(chosen) / p;
  }
  return out;
}

namespace {

std::uint8_t FlipBit(std::uint8_t bit, double flip_probability, Rng& rng) {
  const bool flip = UniformUnit(rng) < flip_probability;
  return flip ? static_cast<std::uint8_t>(1 - bit) : bit;
}

}  // namespace

BitMatrix PerturbLinks(const BitMatrix& adjacency, const LdpParams& params,
                       Rng& rng) {
  const Eigen::Index n = adjacency.rows();
  BitMatrix out = BitMatrix::Zero(n, n);
  const double p_e = params.flip_probability();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const std::uint8_t bit =
          params.enabled ? FlipBit(adjacency(i, j) ? 1 : 0, p_e, rng)
                         : static_cast<std::uint8_t>(adjacency(i, j) ? 1 : 0);
      out(i, j) = bit;
      out(j, i) = bit;
    }
  }
  return out;
}

double ExpectedDensity(double x, double flip_probability) {
  return x + flip_probability - 2.0 * x * flip_probability;
}

absl::StatusOr<BitMatrix> SparsifyCorrect(
    const BitMatrix& noised, const Eigen::MatrixXd& sanitized_nodes,
    double flip_probability) {
  const double p_e = flip_probability;
  if (std::abs(p_e - 0.5) < 1e-15) {
    return absl::InvalidArgumentError(
        "flip probability 1/2 carries no density information");
  }
  const Eigen::Index n = noised.rows();
  if (noised.cols() != n || sanitized_nodes.rows() != n) {
    return absl::InvalidArgumentError("batch shape mismatch");
  }
  BitMatrix out = noised;
  if (n < 2) return out;

  struct Candidate {
    double distance;
    std::int64_t index;
    Eigen::Index i, j;
  };
  std::vector<Candidate> ones;
  std::int64_t index = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j, ++index) {
      if (noised(i, j)) {
        ones.push_back({(sanitized_nodes.row(i) - sanitized_nodes.row(j))
                            .norm(),
                        index, i, j});
      }
    }
  }
  const double pairs = static_cast<double>(n) * (n - 1) / 2.0;
  const double observed = static_cast<double>(ones.size()) / pairs;
  const double target =
      std::clamp((observed - p_e) / (1.0 - 2.0 * p_e), 0.0, observed);
  const std::int64_t to_remove = std::min<std::int64_t>(
      std::llround((observed - target) * pairs),
      static_cast<std::int64_t>(ones.size()));
  if (to_remove <= 0) return out;

  std::sort(ones.begin(), ones.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.distance != b.distance) return a.distance > b.distance;
              return a.index < b.index;
            });
  for (std::int64_t r = 0; r < to_remove; ++r) {
    out(ones[r].i, ones[r].j) = 0;
    out(ones[r].j, ones[r].i) = 0;
  }
  return out;
}

std::uint64_t PermanentCache::PairKey(int u, int v) {
  const auto lo = static_cast<std::uint32_t>(std::min(u, v));
  const auto hi = static_cast<std::uint32_t>(std::max(u, v));
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

const Eigen::RowVectorXd* PermanentCache::FindNode(int node) const {
  auto it = nodes_.find(node);
  return it == nodes_.end() ? nullptr : &it->second;
}

void PermanentCache::PutNode(int node, Eigen::RowVectorXd value) {
  nodes_.emplace(node, std::move(value));
}

const std::uint8_t* PermanentCache::FindLink(int u, int v) const {
  auto it = links_.find(PairKey(u, v));
  return it == links_.end() ? nullptr : &it->second;
}

void PermanentCache::PutLink(int u, int v, std::uint8_t bit) {
  links_.emplace(PairKey(u, v), bit);
}

absl::StatusOr<SanitizedBatch> SanitizeBatch(const ClientSubgraph& sub,
                                             std::span<const int> batch,
                                             const Encoder& encoder,
                                             const LdpParams& params,
                                             PermanentCache* cache, Rng& rng) {
  if (absl::Status s = ValidateLdpParams(params); !s.ok()) return s;
  const int b = static_cast<int>(batch.size());
  std::unordered_set<int> seen;
  for (int local : batch) {
    if (local < 0 || local >= sub.num_nodes()) {
      return absl::InvalidArgumentError(
          absl::StrCat("batch index ", local, " outside client ",
                       sub.client_id));
    }
    if (!seen.insert(local).second) {
      return absl::InvalidArgumentError("duplicate node in batch");
    }
  }

  SanitizedBatch out;
  out.client_id = sub.client_id;
  out.reported_n = sub.num_nodes();
  out.nodes.resize(b, encoder.output_dim());

  Eigen::MatrixXd rows(b, sub.features.cols());
  for (int r = 0; r < b; ++r) rows.row(r) = sub.features.row(batch[r]);
  const Eigen::MatrixXd encoded = encoder.EncodeRaw(rows);
  for (int r = 0; r < b; ++r) {
    const int global = sub.node_ids[batch[r]];
    if (cache != nullptr) {
      if (const Eigen::RowVectorXd* hit = cache->FindNode(global)) {
        out.nodes.row(r) = *hit;
        continue;
      }
    }
    auto sanitized = PerturbNode(encoded.row(r), encoder.x_min,
                                 encoder.x_max, params, rng);
    if (!sanitized.ok()) return sanitized.status();
    out.nodes.row(r) = *sanitized;
    if (cache != nullptr) cache->PutNode(global, *sanitized);
  }

  const double p_e = params.flip_probability();
  BitMatrix noised = BitMatrix::Zero(b, b);
  for (int i = 0; i < b; ++i) {
    for (int j = i + 1; j < b; ++j) {
      const int gu = sub.node_ids[batch[i]];
      const int gv = sub.node_ids[batch[j]];
      std::uint8_t bit;
      const std::uint8_t* hit =
          cache != nullptr ? cache->FindLink(gu, gv) : nullptr;
      if (hit != nullptr) {
        bit = *hit;
      } else {
        bit = sub.adjacency.HasEdge(batch[i], batch[j]) ? 1 : 0;
        if (params.enabled) bit = FlipBit(bit, p_e, rng);
        if (cache != nullptr) cache->PutLink(gu, gv, bit);
      }
      noised(i, j) = bit;
      noised(j, i) = bit;
    }
  }
  auto corrected = SparsifyCorrect(noised, out.nodes, p_e);
  if (!corrected.ok()) return corrected.status();
  out.adjacency = *std::move(corrected);
  return out;
}

}  // namespace fairgfl
