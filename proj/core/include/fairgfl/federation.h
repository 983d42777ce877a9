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

#ifndef FAIRGFL_FEDERATION_H_
#define FAIRGFL_FEDERATION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fairgfl/gcn.h"
#include "fairgfl/graph.h"
#include "fairgfl/ldp.h"
#include "fairgfl/metrics.h"
#include "fairgfl/overlap.h"

namespace fairgfl {

enum class Algorithm { kFairGfl, kFedAvg, kQFedAvg };

// Where fairgfl takes the overlap matrix from.
enum class OverlapSource {
  kEstimated,  // matched sanitized uploads
  kZero,       // all-zero matrix
  kOracle,     // true overlap ratios of the partition
};

struct FedConfig {
  int num_clients = 10;        // P
  int clients_per_round = 5;   // K
  int local_steps = 5;         // E
  int rounds = 100;            // J
  double lr = 0.05;
  int batch_size = 16;         // b
  double lambda = 0.1;
  double alpha = 0.8;
  double beta = 0.5;
  Algorithm algorithm = Algorithm::kFairGfl;
  double q = 1.0;
  std::uint64_t seed = 0;
  int hidden_dim = 16;

  EstimatorMode estimator = EstimatorMode::kCorrected;
  // Aggregate as (1/K) sum q_i w_i instead of in update space.
  bool literal_aggregation = false;
  // Divide fairness weights by their sum instead of by K.
  bool renormalize = false;
  OverlapSource overlap_source = OverlapSource::kEstimated;

  LdpParams ldp;
  int encoder_dim = 16;
  int encoder_epochs = 200;
  bool permanent_cache = true;
  int upload_batch = 64;  // nodes per sanitized upload; 0 means batch_size
  // Match threshold. Negative means calibrate from the public nodes.
  double tau = -1.0;
  ThresholdRule tau_rule = ThresholdRule::kDistinctDistance;
  double tau_quantile = 0.002;

  double test_fraction = 0.2;
  double public_fraction = 0.05;
  // Keep the global model after every round in the result.
  bool record_models = false;
};

absl::Status ValidateFedConfig(const FedConfig& config);

std::string AlgorithmName(Algorithm algorithm);
absl::StatusOr<Algorithm> ParseAlgorithm(absl::string_view name);

// A client's local data with its propagation matrix precomputed.
struct ClientData {
  ClientSubgraph sub;
  NormalizedAdjacency adjacency;
  std::vector<int> all_nodes;  // 0..n-1
};

ClientData MakeClientData(ClientSubgraph sub);

struct ClientReport {
  int client_id = 0;
  GcnModel model;
  double initial_loss = 0.0;  // F_i at the received global model
  double loss = 0.0;          // F_i after local training, full local graph
  bool has_upload = false;
  SanitizedBatch upload;
};

// What a client needs to sanitize its upload. A null encoder skips it.
struct UploadContext {
  const Encoder* encoder = nullptr;
  PermanentCache* cache = nullptr;
};

// E local SGD steps on sampled minibatches, then full-graph losses and an
// optional sanitized upload. Randomness comes from (seed, round, client).
absl::StatusOr<ClientReport> ClientRound(const ClientData& client,
                                         const GcnModel& global,
                                         const FedConfig& config, int round,
                                         const UploadContext& upload);

// q_i = 1 / (1 + O_i) for every client.
std::vector<double> FairnessWeights(const Eigen::MatrixXd& overall);

// Sum_i q_i F_i over the given clients.
double FairnessWeightedLoss(const Eigen::MatrixXd& overall,
                            std::span<const int> clients,
                            std::span<const double> losses);

// w + (1/K) sum q_i (w_i - w) + lambda (w_m - w), m the max-loss report.
absl::StatusOr<GcnModel> AggregateFair(const GcnModel& global,
                                       std::span<const ClientReport> reports,
                                       const Eigen::MatrixXd& overall,
                                       double lambda, bool literal = false,
                                       bool renormalize = false);

// w + (1/K) sum (w_i - w).
absl::StatusOr<GcnModel> AggregateFedAvg(
    const GcnModel& global, std::span<const ClientReport> reports);

// q-fair update using the losses at the received global model.
absl::StatusOr<GcnModel> AggregateQFedAvg(
    const GcnModel& global, std::span<const ClientReport> reports, double q,
    double lr);

// Node ids held out from all clients.
struct DataSplit {
  std::vector<int> test;
  std::vector<int> public_nodes;  // encoder training only
  std::vector<int> train;         // eligible for partitioning
};

absl::StatusOr<DataSplit> SplitNodes(int num_nodes, double test_fraction,
                                     double public_fraction,
                                     std::uint64_t seed);

struct OverlapSnapshot {
  int round = 0;
  std::vector<int> sampled;
  OverlapState state;
};

struct ExperimentResult {
  std::vector<RoundRecord> records;
  std::vector<OverlapSnapshot> overlap;
  std::vector<GcnModel> models;  // initial model then one per round
  GcnModel final_model;
  std::vector<ClientSubgraph> parts;
  OverlapMatrices true_overlap;
  DataSplit split;
  double tau = 0.0;
};

absl::StatusOr<ExperimentResult> RunExperiment(const GlobalGraph& graph,
                                               const PartitionSpec& spec,
                                               const FedConfig& config);

}  // namespace fairgfl

#endif  // FAIRGFL_FEDERATION_H_
