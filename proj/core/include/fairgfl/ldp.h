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

#ifndef FAIRGFL_LDP_H_
#define FAIRGFL_LDP_H_

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fairgfl/graph.h"
#include "fairgfl/random.h"

namespace fairgfl {

using BitMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Encode half of a one-hidden-layer autoencoder:
//   z = tanh(((x - mean) / scale) W + b)
// Outputs are clamped into the published range [x_min, x_max].
struct Encoder {
  Eigen::RowVectorXd input_mean;
  Eigen::RowVectorXd input_scale;
  Eigen::MatrixXd weight;  // feature_dim x d1
  Eigen::RowVectorXd bias;
  double x_min = -1.0;
  double x_max = 1.0;

  int input_dim() const { return static_cast<int>(weight.rows()); }
  int output_dim() const { return static_cast<int>(weight.cols()); }

  // Unclamped encodings, one row per input row.
  Eigen::MatrixXd EncodeRaw(const Eigen::MatrixXd& features) const;
  // Encodings clamped into [x_min, x_max].
  Eigen::MatrixXd Encode(const Eigen::MatrixXd& features) const;
};

struct EncoderTrainingOptions {
  int output_dim = 16;
  int epochs = 200;
  double lr = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

// Trains an autoencoder on `public_features` by minibatch SGD on
// reconstruction MSE and returns its encode half. The clamp range is the
// min/max encoding over the public set widened by 5% of its span.
absl::StatusOr<Encoder> TrainEncoder(const Eigen::MatrixXd& public_features,
                                     const EncoderTrainingOptions& options);

// Mean squared reconstruction error of the full autoencoder. Only available
// right after training, so the decoder is returned separately.
struct Autoencoder {
  Encoder encoder;
  Eigen::MatrixXd decoder_weight;  // d1 x feature_dim
  Eigen::RowVectorXd decoder_bias;
  double ReconstructionMse(const Eigen::MatrixXd& features) const;
};
absl::StatusOr<Autoencoder> TrainAutoencoder(
    const Eigen::MatrixXd& public_features,
    const EncoderTrainingOptions& options);

struct LdpParams {
  double epsilon_a = 3.0;  // per element of an encoded node vector
  double epsilon_b = 1.0;  // per adjacency bit
  int quantiles = 8;       // grid {0, 1/p, ..., 1}
  // When false, nodes are snapped to the nearest grid point, links are sent
  // unperturbed and no density correction is applied.
  bool enabled = true;

  double flip_probability() const;
};

absl::Status ValidateLdpParams(const LdpParams& params);

// Output distribution over grid points i/p, i = 0..p, for a normalized input
// x_hat in [0, 1].
std::vector<double> NodeOutputProbabilities(double x_hat, double epsilon_a,
                                            int quantiles);

// Sanitizes one encoded vector. Elements are clamped to [x_min, x_max],
// normalized to [0, 1] and each mapped independently to a grid point.
absl::StatusOr<Eigen::RowVectorXd> PerturbNode(
    const Eigen::RowVectorXd& encoded, double x_min, double x_max,
    const LdpParams& params, Rng& rng);

// Randomized response on the upper triangle, mirrored to the lower one.
// The diagonal is forced to zero.
BitMatrix PerturbLinks(const BitMatrix& adjacency, const LdpParams& params,
                       Rng& rng);

// Expected share of ones after flipping bits of true density x with p_e.
double ExpectedDensity(double x, double flip_probability);

// Removes the ones whose endpoints are farthest apart in sanitized feature
// space until the density matches the debiased estimate of the true density.
absl::StatusOr<BitMatrix> SparsifyCorrect(
    const BitMatrix& noised, const Eigen::MatrixXd& sanitized_nodes,
    double flip_probability);

// First-response cache for one client. Keys are global node ids.
class PermanentCache {
 public:
  const Eigen::RowVectorXd* FindNode(int node) const;
  void PutNode(int node, Eigen::RowVectorXd value);
  const std::uint8_t* FindLink(int u, int v) const;
  void PutLink(int u, int v, std::uint8_t bit);
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_links() const { return links_.size(); }

 private:
  static std::uint64_t PairKey(int u, int v);
  std::unordered_map<int, Eigen::RowVectorXd> nodes_;
  std::unordered_map<std::uint64_t, std::uint8_t> links_;
};

struct SanitizedBatch {
  int client_id = 0;
  Eigen::MatrixXd nodes;  // b x d1, entries on the grid
  BitMatrix adjacency;    // b x b, symmetric, after correction
  int reported_n = 0;     // the client's node count

  int batch_size() const { return static_cast<int>(nodes.rows()); }
};

// Sanitizes the nodes at local indices `batch` of `sub`. With a cache,
// previously released nodes and pairs are reused and only new ones draw from
// `rng`; pass nullptr to perturb afresh on every call.
absl::StatusOr<SanitizedBatch> SanitizeBatch(const ClientSubgraph& sub,
                                             std::span<const int> batch,
                                             const Encoder& encoder,
                                             const LdpParams& params,
                                             PermanentCache* cache, Rng& rng);

}  // namespace fairgfl

#endif  // FAIRGFL_LDP_H_
