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

#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fairgfl {
namespace {

using ::testing::HasSubstr;

GlobalGraph Sbm(std::uint64_t seed, int blocks = 7) {
  SbmSpec spec;
  spec.num_blocks = blocks;
  spec.seed = seed;
  return *GenerateSbm(spec);
}

ClientData WholeGraphClient(const GlobalGraph& g, int id = 0) {
  std::vector<int> ids(g.num_nodes());
  std::iota(ids.begin(), ids.end(), 0);
  return MakeClientData(*MakeClientSubgraph(g, id, ids));
}

GcnModel RandomModel(const GlobalGraph& g, std::uint64_t seed) {
  Rng rng = MakeRng(seed, Stream::kModelInit);
  return InitGcnModel(g.feature_dim(), 16, g.num_classes, rng);
}

double MaxAbsDiff(const GcnModel& a, const GcnModel& b) {
  return std::max((a.w1 - b.w1).cwiseAbs().maxCoeff(),
                  (a.w2 - b.w2).cwiseAbs().maxCoeff());
}

TEST(ClientRoundTest, ZeroStepsReturnTheGlobalModel) {
  const GlobalGraph g = Sbm(1);
  const ClientData client = WholeGraphClient(g);
  const GcnModel w = RandomModel(g, 1);
  FedConfig config;
  config.local_steps = 0;
  ASSERT_OK_AND_ASSIGN(ClientReport r, ClientRound(client, w, config, 0, {}));
  EXPECT_EQ(r.model, w);
  EXPECT_EQ(r.loss, r.initial_loss);
  EXPECT_FALSE(r.has_upload);
}

TEST(ClientRoundTest, OneFullBatchStepIsOneSgdStep) {
  const GlobalGraph g = Sbm(2, 3);
  const ClientData client = WholeGraphClient(g);
  const GcnModel w = RandomModel(g, 2);
  FedConfig config;
  config.local_steps = 1;
  config.batch_size = g.num_nodes() + 10;
  ASSERT_OK_AND_ASSIGN(ClientReport r, ClientRound(client, w, config, 0, {}));
  const LossAndGradient lg = *LossAndGrad(w, client.adjacency, g.features,
                                          g.labels, client.all_nodes);
  const GcnModel expected = *SgdStep(w, lg.grads, config.lr);
  // Same gradient summed in batch order instead of node order.
  EXPECT_LT(MaxAbsDiff(r.model, expected), 1e-14);
}

TEST(ClientRoundTest, LocalTrainingLowersLoss) {
  const GlobalGraph g = Sbm(3, 2);
  const ClientData client = WholeGraphClient(g);
  FedConfig config;
  ASSERT_OK_AND_ASSIGN(ClientReport r,
                       ClientRound(client, RandomModel(g, 3), config, 0, {}));
  EXPECT_LE(r.loss, r.initial_loss);
}

TEST(ClientRoundTest, DeterministicPerRoundAndClient) {
  const GlobalGraph g = Sbm(4);
  const ClientData client = WholeGraphClient(g, 2);
  const GcnModel w = RandomModel(g, 4);
  FedConfig config;
  const ClientReport a = *ClientRound(client, w, config, 5, {});
  const ClientReport b = *ClientRound(client, w, config, 5, {});
  const ClientReport c = *ClientRound(client, w, config, 6, {});
  EXPECT_EQ(a.model, b.model);
  EXPECT_FALSE(a.model == c.model);
}

TEST(ClientRoundTest, UploadsSanitizedBatch) {
  const GlobalGraph g = Sbm(5);
  std::vector<int> ids;
  for (int v = 0; v < 40; ++v) ids.push_back(v * 3);
  const ClientData client = MakeClientData(*MakeClientSubgraph(g, 1, ids));
  EncoderTrainingOptions options;
  options.epochs = 10;
  const Encoder enc = *TrainEncoder(g.features.topRows(30), options);
  PermanentCache cache;
  FedConfig config;
  config.upload_batch = 25;
  ASSERT_OK_AND_ASSIGN(ClientReport r, ClientRound(client, RandomModel(g, 5), config,
                                                   0, {&enc, &cache}));
  ASSERT_TRUE(r.has_upload);
  EXPECT_EQ(r.upload.batch_size(), 25);
  EXPECT_EQ(r.upload.reported_n, 40);
  EXPECT_EQ(r.upload.client_id, 1);
  EXPECT_EQ(cache.num_nodes(), 25u);
  config.upload_batch = 100;  // capped at the client size
  ASSERT_OK_AND_ASSIGN(ClientReport all, ClientRound(client, RandomModel(g, 5),
                                                     config, 1, {&enc, &cache}));
  EXPECT_EQ(all.upload.batch_size(), 40);
}

TEST(ClientRoundTest, DivergenceNamesTheClient) {
  GlobalGraph g = Sbm(6);
  g.features *= 1e300;
  const ClientData client = WholeGraphClient(g, 7);
  FedConfig config;
  auto r = ClientRound(client, RandomModel(g, 6), config, 0, {});
  ASSERT_FALSE(r.ok());
  EXPECT_THAT(std::string(r.status().message()), HasSubstr("client 7"));
}

// Reports whose updates are u on w1 only for client a and v on w2 only for
// client b, so coefficients can be read off each tensor.
struct TwoReports {
  GcnModel global;
  std::vector<ClientReport> reports;
  Eigen::MatrixXd u, v;
};

TwoReports MakeTwoReports(double loss_a, double loss_b) {
  TwoReports t;
  t.global.w1 = Eigen::MatrixXd::Constant(2, 3, 0.5);
  t.global.w2 = Eigen::MatrixXd::Constant(3, 2, -0.25);
  t.u = (Eigen::MatrixXd(2, 3) << 1, 2, 3, 4, 5, 6).finished() / 8.0;
  t.v = (Eigen::MatrixXd(3, 2) << 1, -1, 2, -2, 4, -4).finished() / 16.0;
  ClientReport a, b;
  a.client_id = 0;
  a.model = t.global;
  a.model.w1 += t.u;
  a.loss = a.initial_loss = loss_a;
  b.client_id = 1;
  b.model = t.global;
  b.model.w2 += t.v;
  b.loss = b.initial_loss = loss_b;
  t.reports = {a, b};
  return t;
}

TEST(AggregateFairTest, ZeroOverlapAndLambdaIsFedAvg) {
  const TwoReports t = MakeTwoReports(1.0, 2.0);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  ASSERT_OK_AND_ASSIGN(GcnModel fair, AggregateFair(t.global, t.reports, zero, 0.0));
  ASSERT_OK_AND_ASSIGN(GcnModel avg, AggregateFedAvg(t.global, t.reports));
  EXPECT_EQ(fair, avg);
}

TEST(AggregateFairTest, OverlapHalvesTheWeight) {
  const TwoReports t = MakeTwoReports(1.0, 2.0);
  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(2, 2);
  o(0, 1) = 1.0;  // O = (1, 0)
  ASSERT_OK_AND_ASSIGN(GcnModel m, AggregateFair(t.global, t.reports, o, 0.0));
  // w + (1/2)(u/2 + v)
  EXPECT_TRUE(m.w1.isApprox(t.global.w1 + t.u / 4.0, 1e-15));
  EXPECT_TRUE(m.w2.isApprox(t.global.w2 + t.v / 2.0, 1e-15));
}

TEST(AggregateFairTest, LambdaAddsMaxLossUpdate) {
  const TwoReports t = MakeTwoReports(1.0, 2.0);  // client 1 has max loss
  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(2, 2);
  o(0, 1) = 1.0;
  const GcnModel base = *AggregateFair(t.global, t.reports, o, 0.0);
  const GcnModel with = *AggregateFair(t.global, t.reports, o, 0.5);
  EXPECT_TRUE((with.w2 - base.w2).isApprox(0.5 * t.v, 1e-14));
  EXPECT_LT((with.w1 - base.w1).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AggregateFairTest, MaxLossTieGoesToLowestId) {
  const TwoReports t = MakeTwoReports(2.0, 2.0);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  const GcnModel base = *AggregateFair(t.global, t.reports, zero, 0.0);
  const GcnModel with = *AggregateFair(t.global, t.reports, zero, 1.0);
  EXPECT_TRUE((with.w1 - base.w1).isApprox(t.u, 1e-14));
}

TEST(AggregateFairTest, LargerOverlapShrinksContribution) {
  const TwoReports t = MakeTwoReports(1.0, 2.0);
  double previous = 1e9;
  for (double o01 : {0.0, 0.1, 0.5, 2.0}) {
    Eigen::MatrixXd o = Eigen::MatrixXd::Zero(2, 2);
    o(0, 1) = o01;
    const GcnModel m = *AggregateFair(t.global, t.reports, o, 0.0);
    const double norm = (m.w1 - t.global.w1).norm();
    EXPECT_LT(norm, previous);
    previous = norm;
  }
}

TEST(AggregateFairTest, LiteralAndRenormalizedVariants) {
  const TwoReports t = MakeTwoReports(1.0, 2.0);
  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(2, 2);
  o(0, 1) = 1.0;
  // Literal: (1/K) sum q_i w_i, which shrinks parameters.
  const GcnModel lit = *AggregateFair(t.global, t.reports, o, 0.0, true);
  EXPECT_TRUE(lit.w1.isApprox(0.5 * (0.5 * (t.global.w1 + t.u) + t.global.w1), 1e-15));
  // Renormalized: weights q_i / sum q = (1/3, 2/3).
  const GcnModel ren = *AggregateFair(t.global, t.reports, o, 0.0, false, true);
  EXPECT_TRUE(ren.w1.isApprox(t.global.w1 + t.u / 3.0, 1e-15));
  EXPECT_TRUE(ren.w2.isApprox(t.global.w2 + 2.0 * t.v / 3.0, 1e-15));
}

TEST(AggregateFairTest, InvalidInputs) {
  const TwoReports t = MakeTwoReports(1.0, 2.0);
  EXPECT_FALSE(AggregateFair(t.global, t.reports, Eigen::MatrixXd::Zero(2, 2), -1.0).ok());
  EXPECT_FALSE(AggregateFair(t.global, t.reports, Eigen::MatrixXd::Zero(1, 1), 0.0).ok());
  EXPECT_FALSE(AggregateFedAvg(t.global, {}).ok());
  std::vector<ClientReport> bad = t.reports;
  bad[0].model.w1.resize(1, 1);
  EXPECT_FALSE(AggregateFedAvg(t.global, bad).ok());
}

TEST(AggregateFedAvgTest, SimpleIdentities) {
  const TwoReports t = MakeTwoReports(1.0, 2.0);
  const std::vector<ClientReport> one = {t.reports[0]};
  EXPECT_LT(MaxAbsDiff(*AggregateFedAvg(t.global, one), t.reports[0].model), 1e-15);
  const std::vector<ClientReport> same = {t.reports[0], t.reports[0]};
  EXPECT_LT(MaxAbsDiff(*AggregateFedAvg(t.global, same), t.reports[0].model), 1e-15);
  GcnModel zero = ZerosLike(t.global);
  std::vector<ClientReport> sym = {t.reports[0], t.reports[0]};
  sym[1].model.w1 = -sym[0].model.w1;
  sym[1].model.w2 = -sym[0].model.w2;
  EXPECT_EQ(*AggregateFedAvg(zero, sym), zero);
}

TEST(AggregateQFedAvgTest, ZeroExponentIsFedAvg) {
  const TwoReports t = MakeTwoReports(1.3, 0.4);
  EXPECT_EQ(*AggregateQFedAvg(t.global, t.reports, 0.0, 0.05),
            *AggregateFedAvg(t.global, t.reports));
}

// Coefficient of each client's update, read off its own tensor.
std::pair<double, double> QCoefficients(const TwoReports& t, double q) {
  const GcnModel m = *AggregateQFedAvg(t.global, t.reports, q, 0.05);
  return {(m.w1 - t.global.w1)(1, 2) / t.u(1, 2),
          (m.w2 - t.global.w2)(2, 0) / t.v(2, 0)};
}

TEST(AggregateQFedAvgTest, UnitExponentDoublesMaxLossWeight) {
  const TwoReports t = MakeTwoReports(2.0, 1.0);
  const auto [a, b] = QCoefficients(t, 1.0);
  EXPECT_NEAR(a / b, 2.0, 1e-12);
  // Normalizer: sum q F^(q-1) |Δ|^2 / lr + F^q.
  const double denom = (t.u.squaredNorm() + t.v.squaredNorm()) / 0.05 + 3.0;
  EXPECT_NEAR(a, 2.0 / denom, 1e-12);
}

TEST(AggregateQFedAvgTest, HigherExponentFavorsMaxLossClient) {
  const TwoReports t = MakeTwoReports(2.0, 1.0);
  double previous = 0.0;
  for (double q : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    const auto [a, b] = QCoefficients(t, q);
    EXPECT_GT(a / b, previous) << q;
    previous = a / b;
  }
}

TEST(AggregateQFedAvgTest, InvalidInputs) {
  const TwoReports t = MakeTwoReports(2.0, 1.0);
  EXPECT_FALSE(AggregateQFedAvg(t.global, t.reports, -1.0, 0.05).ok());
  EXPECT_FALSE(AggregateQFedAvg(t.global, t.reports, 1.0, 0.0).ok());
}

// Clients 0-2 hold copies of subgraph A, clients 3-4 copies of B, client 5
// holds C alone. With the true overlap matrix the weighted sum of client
// losses counts every distinct subgraph once.
TEST(FairnessWeightedLossTest, DuplicatedSubgraphsCountOnce) {
  const GlobalGraph g = Sbm(7);
  std::vector<int> a, b, c;
  for (int v = 0; v < 60; ++v) a.push_back(v);
  for (int v = 100; v < 170; ++v) b.push_back(v);
  for (int v = 300; v < 345; ++v) c.push_back(v);
  const std::vector<std::vector<int>> holdings = {a, a, a, b, b, c};
  std::vector<ClientSubgraph> parts;
  for (int i = 0; i < 6; ++i) {
    parts.push_back(*MakeClientSubgraph(g, i, holdings[i]));
  }
  const OverlapMatrices truth = TrueOverlapMatrices(parts);
  const double alpha = 0.8;
  const Eigen::MatrixXd overall = alpha * truth.node + (1 - alpha) * truth.link;
  const GcnModel w = RandomModel(g, 7);
  std::vector<double> losses;
  for (const auto& p : parts) {
    const ClientData d = MakeClientData(p);
    losses.push_back(*MaskedLoss(w, d.adjacency, p.features, p.labels, d.all_nodes));
  }
  const std::vector<int> ids = {0, 1, 2, 3, 4, 5};
  const double weighted = FairnessWeightedLoss(overall, ids, losses);
  const double deduplicated = losses[0] + losses[3] + losses[5];
  EXPECT_NEAR(weighted, deduplicated, 1e-10);
  const auto q = FairnessWeights(overall);
  EXPECT_NEAR(q[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(q[5], 1.0, 1e-15);
}

TEST(SplitNodesTest, DisjointAndDeterministic) {
  ASSERT_OK_AND_ASSIGN(DataSplit s, SplitNodes(400, 0.2, 0.05, 3));
  EXPECT_EQ(s.test.size(), 80u);
  EXPECT_EQ(s.public_nodes.size(), 20u);
  EXPECT_EQ(s.train.size(), 300u);
  std::set<int> all(s.test.begin(), s.test.end());
  all.insert(s.public_nodes.begin(), s.public_nodes.end());
  all.insert(s.train.begin(), s.train.end());
  EXPECT_EQ(all.size(), 400u);
  EXPECT_EQ(SplitNodes(400, 0.2, 0.05, 3)->test, s.test);
  EXPECT_FALSE(SplitNodes(10, 0.6, 0.4, 0).ok());
}

struct Scenario {
  GlobalGraph graph;
  PartitionSpec spec;
  FedConfig config;
};

Scenario SmallScenario(std::uint64_t seed) {
  Scenario s;
  s.graph = Sbm(seed);
  s.spec.overlap = 0.2;
  s.spec.seed = seed;
  s.config.seed = seed;
  s.config.rounds = 5;
  s.config.record_models = true;
  return s;
}

TEST(RunExperimentTest, ZeroRoundsKeepsInitialModel) {
  Scenario s = SmallScenario(1);
  s.config.rounds = 0;
  ASSERT_OK_AND_ASSIGN(ExperimentResult r, RunExperiment(s.graph, s.spec, s.config));
  EXPECT_TRUE(r.records.empty());
  ASSERT_EQ(r.models.size(), 1u);
  EXPECT_EQ(r.final_model, r.models[0]);
}

TEST(RunExperimentTest, ReductionsAreBitwiseIdentical) {
  Scenario s = SmallScenario(2);
  s.config.algorithm = Algorithm::kFedAvg;
  ASSERT_OK_AND_ASSIGN(ExperimentResult avg, RunExperiment(s.graph, s.spec, s.config));
  s.config.algorithm = Algorithm::kFairGfl;
  s.config.lambda = 0.0;
  s.config.overlap_source = OverlapSource::kZero;
  ASSERT_OK_AND_ASSIGN(ExperimentResult fair, RunExperiment(s.graph, s.spec, s.config));
  s.config.algorithm = Algorithm::kQFedAvg;
  s.config.q = 0.0;
  ASSERT_OK_AND_ASSIGN(ExperimentResult qavg, RunExperiment(s.graph, s.spec, s.config));
  ASSERT_EQ(avg.models.size(), 6u);
  for (std::size_t j = 0; j < avg.models.size(); ++j) {
    EXPECT_EQ(fair.models[j], avg.models[j]) << j;
    EXPECT_EQ(qavg.models[j], avg.models[j]) << j;
  }
  for (std::size_t j = 0; j < avg.records.size(); ++j) {
    EXPECT_EQ(fair.records[j].client_losses, avg.records[j].client_losses);
    EXPECT_EQ(qavg.records[j].test_loss, avg.records[j].test_loss);
  }
}

// One client sampled every round reproduces plain local training.
TEST(RunExperimentTest, SingleClientMatchesCentralizedTraining) {
  Scenario s = SmallScenario(3);
  s.spec.num_clients = 1;
  s.spec.overlap = 0.0;
  s.config.num_clients = 1;
  s.config.clients_per_round = 1;
  s.config.algorithm = Algorithm::kFedAvg;
  ASSERT_OK_AND_ASSIGN(ExperimentResult r, RunExperiment(s.graph, s.spec, s.config));
  const ClientData client = MakeClientData(r.parts[0]);
  GcnModel w = r.models[0];
  for (int j = 0; j < s.config.rounds; ++j) {
    Rng rng = MakeRng(s.config.seed, Stream::kLocalTraining,
                      {static_cast<std::uint64_t>(j), 0});
    const int n = client.sub.num_nodes();
    for (int e = 0; e < s.config.local_steps; ++e) {
      const auto batch = SampleWithoutReplacement(n, std::min(s.config.batch_size, n), rng);
      const LossAndGradient lg = *LossAndGrad(w, client.adjacency, client.sub.features,
                                              client.sub.labels, batch);
      w = *SgdStep(w, lg.grads, s.config.lr);
    }
    EXPECT_LT(MaxAbsDiff(w, r.models[j + 1]), 1e-12) << "round " << j;
  }
}

TEST(RunExperimentTest, DeterministicAndWellFormed) {
  Scenario s = SmallScenario(4);
  ASSERT_OK_AND_ASSIGN(ExperimentResult a, RunExperiment(s.graph, s.spec, s.config));
  ASSERT_OK_AND_ASSIGN(ExperimentResult b, RunExperiment(s.graph, s.spec, s.config));
  ASSERT_EQ(a.records.size(), 5u);
  EXPECT_EQ(a.final_model, b.final_model);
  EXPECT_GT(a.tau, 0.0);
  std::set<int> held(a.split.test.begin(), a.split.test.end());
  held.insert(a.split.public_nodes.begin(), a.split.public_nodes.end());
  for (const auto& p : a.parts) {
    for (int v : p.node_ids) EXPECT_FALSE(held.count(v)) << v;
  }
  for (const RoundRecord& rec : a.records) {
    EXPECT_EQ(rec.client_losses.size(), 10u);
    EXPECT_GE(rec.loss_var, 0.0);
    EXPECT_GE(rec.test_acc, 0.0);
    EXPECT_LE(rec.test_acc, 1.0);
    EXPECT_LE(rec.loss_entropy, std::log(10.0) + 1e-12);
  }
  ASSERT_EQ(a.overlap.size(), 5u);
  for (const auto& snap : a.overlap) {
    EXPECT_EQ(snap.sampled.size(), 5u);
    EXPECT_GE(snap.state.overall.minCoeff(), 0.0);
    EXPECT_LE(snap.state.node_acc.maxCoeff(), 1.0);
  }
}

TEST(RunExperimentTest, OracleOverlapStartsFromTruth) {
  Scenario s = SmallScenario(5);
  s.config.overlap_source = OverlapSource::kOracle;
  s.config.rounds = 1;
  ASSERT_OK_AND_ASSIGN(ExperimentResult r, RunExperiment(s.graph, s.spec, s.config));
  EXPECT_EQ(r.overlap[0].state.node_acc, r.true_overlap.node);
}

TEST(RunExperimentTest, InvalidConfigs) {
  Scenario s = SmallScenario(6);
  s.config.clients_per_round = 11;
  EXPECT_FALSE(RunExperiment(s.graph, s.spec, s.config).ok());
  s = SmallScenario(6);
  s.spec.num_clients = 4;
  EXPECT_FALSE(RunExperiment(s.graph, s.spec, s.config).ok());
}

TEST(RunExperimentTest, DivergenceNamesRoundAndClient) {
  Scenario s = SmallScenario(7);
  s.graph.features *= 1e200;
  auto r = RunExperiment(s.graph, s.spec, s.config);
  ASSERT_FALSE(r.ok());
  EXPECT_THAT(std::string(r.status().message()), HasSubstr("round 1: client"));
}

TEST(AlgorithmNameTest, RoundTrips) {
  for (Algorithm a : {Algorithm::kFairGfl, Algorithm::kFedAvg, Algorithm::kQFedAvg}) {
    EXPECT_EQ(*ParseAlgorithm(AlgorithmName(a)), a);
  }
  EXPECT_FALSE(ParseAlgorithm("fedprox").ok());
}

}  // namespace
}  // namespace fairgfl
