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

#include "fairgfl/federation.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fairgfl/random.h"
#include "fairgfl/status_macros.h"

namespace fairgfl {
namespace {

absl::Status Annotate(const absl::Status& status, absl::string_view prefix) {
  return absl::Status(status.code(), absl::StrCat(prefix, status.message()));
}

// Returns w + sum_i c_i (w_i - w), summing in report order. Every
// update-space aggregator goes through here so that equal coefficients give
// bitwise-equal models.
GcnModel ApplyUpdates(const GcnModel& global,
                      std::span<const ClientReport> reports,
                      std::span<const double> coefficients,
                      int extra_index = -1, double extra_coefficient = 0.0) {
  GcnModel total = ZerosLike(global);
  for (size_t i = 0; i < reports.size(); ++i) {
    total.w1 += coefficients[i] * (reports[i].model.w1 - global.w1);
    total.w2 += coefficients[i] * (reports[i].model.w2 - global.w2);
  }
  if (extra_index >= 0) {
    const GcnModel& m = reports[extra_index].model;
    total.w1 += extra_coefficient * (m.w1 - global.w1);
    total.w2 += extra_coefficient * (m.w2 - global.w2);
  }
  return GcnModel{global.w1 + total.w1, global.w2 + total.w2};
}

absl::Status CheckReports(const GcnModel& global,
                          std::span<const ClientReport> reports) {
  if (reports.empty()) return absl::InvalidArgumentError("no reports");
  for (const ClientReport& r : reports) {
    if (r.model.w1.rows() != global.w1.rows() ||
        r.model.w1.cols() != global.w1.cols() ||
        r.model.w2.rows() != global.w2.rows() ||
        r.model.w2.cols() != global.w2.cols()) {
      return absl::InvalidArgumentError(
          absl::StrCat("client ", r.client_id, " sent a mismatched model"));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ValidateFedConfig(const FedConfig& c) {
  if (c.num_clients < 1) return absl::InvalidArgumentError("P must be >= 1");
  if (c.clients_per_round < 1 || c.clients_per_round > c.num_clients) {
    return absl::InvalidArgumentError("K must be in [1, P]");
  }
  if (c.local_steps < 1) return absl::InvalidArgumentError("E must be >= 1");
  if (c.rounds < 0) return absl::InvalidArgumentError("J must be >= 0");
  if (!(c.lr > 0.0)) return absl::InvalidArgumentError("lr must be > 0");
  if (c.batch_size < 1) return absl::InvalidArgumentError("b must be >= 1");
  if (!(c.lambda >= 0.0)) {
    return absl::InvalidArgumentError("lambda must be >= 0");
  }
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) {
    return absl::InvalidArgumentError("alpha must be in [0, 1]");
  }
  if (!(c.beta > 0.0 && c.beta <= 1.0)) {
    return absl::InvalidArgumentError("beta must be in (0, 1]");
  }
  if (!(c.q >= 0.0)) return absl::InvalidArgumentError("q must be >= 0");
  if (c.hidden_dim < 1) {
    return absl::InvalidArgumentError("hidden_dim must be >= 1");
  }
  if (c.encoder_dim < 1 || c.encoder_epochs < 0 || c.upload_batch < 0) {
    return absl::InvalidArgumentError("invalid encoder/upload settings");
  }
  if (!(c.tau_quantile >= 0.0 && c.tau_quantile <= 1.0)) {
    return absl::InvalidArgumentError("tau_quantile must be in [0, 1]");
  }
  if (!(c.test_fraction >= 0.0) || !(c.public_fraction >= 0.0) ||
      c.test_fraction + c.public_fraction >= 1.0) {
    return absl::InvalidArgumentError(
        "test_fraction + public_fraction must be in [0, 1)");
  }
  return ValidateLdpParams(c.ldp);
}

std::string AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kFairGfl:
      return "fairgfl";
    case Algorithm::kFedAvg:
      return "fedavg";
    case Algorithm::kQFedAvg:
      return "qfedavg";
  }
  return "unknown";
}

absl::StatusOr<Algorithm> ParseAlgorithm(absl::string_view name) {
  for (Algorithm a :
       {Algorithm::kFairGfl, Algorithm::kFedAvg, Algorithm::kQFedAvg}) {
    if (name == AlgorithmName(a)) return a;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown algorithm '", name, "' (fairgfl, fedavg, qfedavg)"));
}

ClientData MakeClientData(ClientSubgraph sub) {
  ClientData data;
  data.adjacency = NormalizeAdjacency(sub.adjacency);
  data.all_nodes.resize(sub.num_nodes());
  std::iota(data.all_nodes.begin(), data.all_nodes.end(), 0);
  data.sub = std::move(sub);
  return data;
}

absl::StatusOr<ClientReport> ClientRound(const ClientData& client,
                                         const GcnModel& global,
                                         const FedConfig& config, int round,
                                         const UploadContext& upload) {
  const ClientSubgraph& sub = client.sub;
  const int id = sub.client_id;
  const std::string where = absl::StrCat("client ", id, ": ");
  if (sub.num_nodes() == 0) {
    return absl::FailedPreconditionError(absl::StrCat(where, "no nodes"));
  }
  ClientReport report;
  report.client_id = id;
  auto initial = MaskedLoss(global, client.adjacency, sub.features,
                            sub.labels, client.all_nodes);
  if (!initial.ok()) return Annotate(initial.status(), where);
  report.initial_loss = *initial;

  const auto r = static_cast<std::uint64_t>(round);
  const auto c = static_cast<std::uint64_t>(id);
  Rng rng = MakeRng(config.seed, Stream::kLocalTraining, {r, c});
  GcnModel model = global;
  const int b = std::min(config.batch_size, sub.num_nodes());
  for (int step = 0; step < config.local_steps; ++step) {
    const std::vector<int> batch =
        SampleWithoutReplacement(sub.num_nodes(), b, rng);
    auto lg = LossAndGrad(model, client.adjacency, sub.features, sub.labels,
                          batch);
    if (!lg.ok()) return Annotate(lg.status(), where);
    auto next = SgdStep(model, lg->grads, config.lr);
    if (!next.ok()) return Annotate(next.status(), where);
    model = *std::move(next);
  }
  auto final_loss = MaskedLoss(model, client.adjacency, sub.features,
                               sub.labels, client.all_nodes);
  if (!final_loss.ok()) return Annotate(final_loss.status(), where);
  report.loss = *final_loss;
  report.model = std::move(model);

  if (upload.encoder != nullptr) {
    const int ub = config.upload_batch > 0 ? config.upload_batch
                                           : config.batch_size;
    Rng pick = MakeRng(config.seed, Stream::kUploadBatch, {r, c});
    const std::vector<int> batch = SampleWithoutReplacement(
        sub.num_nodes(), std::min(ub, sub.num_nodes()), pick);
    Rng noise = MakeRng(config.seed, Stream::kSanitize, {r, c});
    auto sanitized =
        SanitizeBatch(sub, batch, *upload.encoder, config.ldp,
                      config.permanent_cache ? upload.cache : nullptr, noise);
    if (!sanitized.ok()) return Annotate(sanitized.status(), where);
    report.upload = *std::move(sanitized);
    report.has_upload = true;
  }
  return report;
}

std::vector<double> FairnessWeights(const Eigen::MatrixXd& overall) {
  const Eigen::Index p = overall.rows();
  std::vector<double> q(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    double o = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k != i) o += overall(i, k);
    }
    q[i] = 1.0 / (1.0 + o);
  }
  return q;
}

double FairnessWeightedLoss(const Eigen::MatrixXd& overall,
                            std::span<const int> clients,
                            std::span<const double> losses) {
  const std::vector<double> q = FairnessWeights(overall);
  double total = 0.0;
  for (size_t i = 0; i < clients.size(); ++i) {
    total += q[clients[i]] * losses[i];
  }
  return total;
}

absl::StatusOr<GcnModel> AggregateFair(const GcnModel& global,
                                       std::span<const ClientReport> reports,
                                       const Eigen::MatrixXd& overall,
                                       double lambda, bool literal,
                                       bool renormalize) {
  RETURN_IF_ERROR(CheckReports(global, reports));
  if (!(lambda >= 0.0)) {
    return absl::InvalidArgumentError("lambda must be >= 0");
  }
  const std::vector<double> q_all = FairnessWeights(overall);
  std::vector<double> coeffs(reports.size());
  double q_sum = 0.0;
  for (size_t i = 0; i < reports.size(); ++i) {
    const int id = reports[i].client_id;
    if (id < 0 || id >= static_cast<int>(q_all.size())) {
      return absl::InvalidArgumentError(
          absl::StrCat("no overlap entry for client ", id));
    }
    coeffs[i] = q_all[id];
    q_sum += coeffs[i];
  }
  const double inv_k = 1.0 / static_cast<double>(reports.size());
  for (double& c : coeffs) c = renormalize ? c / q_sum : c * inv_k;

  int max_index = -1;
  if (lambda > 0.0) {
    max_index = 0;
    for (size_t i = 1; i < reports.size(); ++i) {
      const ClientReport& a = reports[i];
      const ClientReport& best = reports[max_index];
      if (a.loss > best.loss ||
          (a.loss == best.loss && a.client_id < best.client_id)) {
        max_index = static_cast<int>(i);
      }
    }
  }
  if (!literal) {
    return ApplyUpdates(global, reports, coeffs, max_index, lambda);
  }
  GcnModel out = ZerosLike(global);
  for (size_t i = 0; i < reports.size(); ++i) {
    out.w1 += coeffs[i] * reports[i].model.w1;
    out.w2 += coeffs[i] * reports[i].model.w2;
  }
  if (max_index >= 0) {
    const GcnModel& m = reports[max_index].model;
    out.w1 += lambda * (m.w1 - global.w1);
    out.w2 += lambda * (m.w2 - global.w2);
  }
  return out;
}

absl::StatusOr<GcnModel> AggregateFedAvg(
    const GcnModel& global, std::span<const ClientReport> reports) {
  RETURN_IF_ERROR(CheckReports(global, reports));
  const std::vector<double> coeffs(
      reports.size(), 1.0 / static_cast<double>(reports.size()));
  return ApplyUpdates(global, reports, coeffs);
}

absl::StatusOr<GcnModel> AggregateQFedAvg(
    const GcnModel& global, std::span<const ClientReport> reports, double q,
    double lr) {
  RETURN_IF_ERROR(CheckReports(global, reports));
  if (!(q >= 0.0)) return absl::InvalidArgumentError("q must be >= 0");
  if (!(lr > 0.0)) return absl::InvalidArgumentError("lr must be > 0");
  // With L = 1/lr and D_i = L (w - w_i) the update is
  //   w - sum F_i^q D_i / sum (q F_i^(q-1) |D_i|^2 + L F_i^q).
  // Multiplying through by lr gives coefficients on (w_i - w) of
  //   F_i^q / sum (q F_i^(q-1) |w_i - w|^2 / lr + F_i^q).
  std::vector<double> numer(reports.size());
  double denom = 0.0;
  for (size_t i = 0; i < reports.size(); ++i) {
    const double f = reports[i].initial_loss;
    if (!(f >= 0.0) || !std::isfinite(f)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "client ", reports[i].client_id, " reported an invalid loss"));
    }
    numer[i] = std::pow(f, q);
    denom += numer[i];
    // At F = 0 only the F^q term remains.
    if (q > 0.0 && f > 0.0) {
      const double dist2 = SquaredNorm(Difference(reports[i].model, global));
      denom += q * std::pow(f, q - 1.0) * dist2 / lr;
    }
  }
  if (denom == 0.0) return global;
  std::vector<double> coeffs(reports.size());
  for (size_t i = 0; i < reports.size(); ++i) coeffs[i] = numer[i] / denom;
  return ApplyUpdates(global, reports, coeffs);
}

absl::StatusOr<DataSplit> SplitNodes(int num_nodes, double test_fraction,
                                     double public_fraction,
                                     std::uint64_t seed) {
  if (num_nodes < 1) return absl::InvalidArgumentError("empty graph");
  const int n_test = static_cast<int>(std::lround(test_fraction * num_nodes));
  const int n_public =
      static_cast<int>(std::lround(public_fraction * num_nodes));
  if (n_test + n_public >= num_nodes) {
    return absl::InvalidArgumentError("no nodes left for clients");
  }
  Rng rng = MakeRng(seed, Stream::kSplit);
  std::vector<int> order = SampleWithoutReplacement(num_nodes, num_nodes, rng);
  DataSplit split;
  split.test.assign(order.begin(), order.begin() + n_test);
  split.public_nodes.assign(order.begin() + n_test,
                            order.begin() + n_test + n_public);
  split.train.assign(order.begin() + n_test + n_public, order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.public_nodes.begin(), split.public_nodes.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

absl::StatusOr<ExperimentResult> RunExperiment(const GlobalGraph& graph,
                                               const PartitionSpec& spec,
                                               const FedConfig& config) {
  RETURN_IF_ERROR(ValidateFedConfig(config));
  RETURN_IF_ERROR(ValidateGraph(graph));
  if (spec.num_clients != config.num_clients) {
    return absl::InvalidArgumentError(
        "partition and federation disagree on the number of clients");
  }
  const int p = config.num_clients;
  const int k = config.clients_per_round;

  ExperimentResult result;
  ASSIGN_OR_RETURN(result.split,
                   SplitNodes(graph.num_nodes(), config.test_fraction,
                              config.public_fraction, config.seed));
  if (result.split.test.empty()) {
    return absl::InvalidArgumentError("test split is empty");
  }
  ASSIGN_OR_RETURN(result.parts, Partition(graph, spec, result.split.train));
  result.true_overlap = TrueOverlapMatrices(result.parts);
  std::vector<ClientData> clients;
  clients.reserve(p);
  for (const ClientSubgraph& part : result.parts) {
    clients.push_back(MakeClientData(part));
  }

  const bool fair = config.algorithm == Algorithm::kFairGfl;
  const bool estimate =
      fair && config.overlap_source == OverlapSource::kEstimated;
  Encoder encoder;
  if (estimate) {
    if (result.split.public_nodes.size() < 2) {
      return absl::FailedPreconditionError(
          "overlap estimation needs at least 2 public nodes");
    }
    Eigen::MatrixXd public_features(result.split.public_nodes.size(),
                                    graph.feature_dim());
    for (size_t r = 0; r < result.split.public_nodes.size(); ++r) {
      public_features.row(r) =
          graph.features.row(result.split.public_nodes[r]);
    }
    EncoderTrainingOptions options;
    options.output_dim = config.encoder_dim;
    options.epochs = config.encoder_epochs;
    options.seed = config.seed;
    ASSIGN_OR_RETURN(encoder, TrainEncoder(public_features, options));
    if (config.tau >= 0.0) {
      result.tau = config.tau;
    } else {
      Rng rng = MakeRng(config.seed, Stream::kThreshold);
      ASSIGN_OR_RETURN(result.tau,
                       CalibrateThreshold(encoder, public_features,
                                          config.ldp, config.tau_rule,
                                          config.tau_quantile, rng));
    }
  }

  const NormalizedAdjacency global_adjacency =
      NormalizeAdjacency(graph.adjacency);
  Rng init_rng = MakeRng(config.seed, Stream::kModelInit);
  GcnModel model = InitGcnModel(graph.feature_dim(), config.hidden_dim,
                                graph.num_classes, init_rng);
  if (config.record_models) result.models.push_back(model);

  OverlapState state = MakeOverlapState(p, config.alpha, config.beta);
  if (fair && config.overlap_source == OverlapSource::kOracle) {
    state.node_acc = result.true_overlap.node;
    state.link_acc = result.true_overlap.link;
    state.overall = config.alpha * state.node_acc +
                    (1.0 - config.alpha) * state.link_acc;
  }
  std::vector<PermanentCache> caches(p);

  for (int j = 0; j < config.rounds; ++j) {
    const auto start = std::chrono::steady_clock::now();
    const std::string where = absl::StrCat("round ", j + 1, ": ");
    Rng sampler = MakeRng(config.seed, Stream::kClientSampling,
                          {static_cast<std::uint64_t>(j)});
    std::vector<int> sampled = SampleWithoutReplacement(p, k, sampler);
    std::sort(sampled.begin(), sampled.end());

    std::vector<ClientReport> reports;
    reports.reserve(k);
    for (int id : sampled) {
      UploadContext upload;
      if (estimate) {
        upload.encoder = &encoder;
        upload.cache = &caches[id];
      }
      auto report = ClientRound(clients[id], model, config, j, upload);
      if (!report.ok()) return Annotate(report.status(), where);
      reports.push_back(*std::move(report));
    }

    if (estimate) {
      std::vector<SanitizedBatch> uploads;
      for (const ClientReport& r : reports) uploads.push_back(r.upload);
      auto round_estimates =
          EstimateFromBatches(uploads, p, result.tau, config.estimator);
      if (!round_estimates.ok()) {
        return Annotate(round_estimates.status(), where);
      }
      RETURN_IF_ERROR(UpdateState(state, *round_estimates));
    }

    absl::StatusOr<GcnModel> next;
    switch (config.algorithm) {
      case Algorithm::kFairGfl:
        next = AggregateFair(model, reports, state.overall, config.lambda,
                             config.literal_aggregation, config.renormalize);
        break;
      case Algorithm::kFedAvg:
        next = AggregateFedAvg(model, reports);
        break;
      case Algorithm::kQFedAvg:
        next = AggregateQFedAvg(model, reports, config.q, config.lr);
        break;
    }
    if (!next.ok()) return Annotate(next.status(), where);
    if (!AllFinite(*next)) {
      return absl::InternalError(
          absl::StrCat(where, "aggregated model is not finite"));
    }
    model = *std::move(next);

    RoundRecord record;
    record.round = j + 1;
    record.algorithm = AlgorithmName(config.algorithm);
    auto eval = EvaluateGlobal(model, global_adjacency, graph.features,
                               graph.labels, result.split.test);
    if (!eval.ok()) return Annotate(eval.status(), where);
    record.test_loss = eval->loss;
    record.test_acc = eval->accuracy;
    record.client_losses.resize(p);
    for (int i = 0; i < p; ++i) {
      auto loss = MaskedLoss(model, clients[i].adjacency,
                             clients[i].sub.features, clients[i].sub.labels,
                             clients[i].all_nodes);
      if (!loss.ok()) return Annotate(loss.status(), where);
      record.client_losses[i] = *loss;
    }
    if (absl::Status s = FillFairnessMetrics(record); !s.ok()) {
      return Annotate(s, where);
    }
    record.wall_time_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    result.records.push_back(std::move(record));
    if (fair) result.overlap.push_back({j + 1, sampled, state});
    if (config.record_models) result.models.push_back(model);
  }
  result.final_model = std::move(model);
  return result;
}

}  // namespace fairgfl
