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
#include "fairgfl/metrics.h"

#include <cmath>
#include <fstream>
#include <numeric>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fairgfl {
namespace {

using ::testing::HasSubstr;

TEST(LossVarianceTest, HandValues) {
  const std::vector<double> equal = {0.7, 0.7, 0.7};
  EXPECT_NEAR(*LossVariance(equal), 0.0, 1e-30);
  const std::vector<double> two = {1.0, 3.0};
  EXPECT_DOUBLE_EQ(*LossVariance(two), 1.0);
  EXPECT_FALSE(LossVariance({}).ok());
}

TEST(LossVarianceTest, ScalesQuadratically) {
  const std::vector<double> f = {0.2, 0.9, 1.4, 0.05};
  std::vector<double> g;
  for (double x : f) g.push_back(3.0 * x);
  EXPECT_NEAR(*LossVariance(g), 9.0 * *LossVariance(f), 1e-12);
}

TEST(LossEntropyTest, HandValues) {
  const std::vector<double> equal(6, 0.4);
  EXPECT_NEAR(LossEntropy(equal)->value, std::log(6.0), 1e-15);
  const std::vector<double> two = {1.0, 3.0};
  const double expected = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
  EXPECT_NEAR(LossEntropy(two)->value, expected, 1e-15);
  EXPECT_NEAR(expected, 0.5623, 1e-4);
}

TEST(LossEntropyTest, ScaleInvariantAndBounded) {
  const std::vector<double> f = {0.2, 0.9, 1.4, 0.05, 0.0};
  std::vector<double> g;
  for (double x : f) g.push_back(7.5 * x);
  const double h = LossEntropy(f)->value;
  EXPECT_NEAR(LossEntropy(g)->value, h, 1e-12);
  EXPECT_GE(h, 0.0);
  EXPECT_LE(h, std::log(5.0));
}

TEST(LossEntropyTest, AllZeroIsFlaggedDegenerate) {
  const std::vector<double> zeros(4, 0.0);
  ASSERT_OK_AND_ASSIGN(EntropyResult r, LossEntropy(zeros));
  EXPECT_TRUE(r.degenerate);
  EXPECT_NEAR(r.value, std::log(4.0), 1e-15);
  const std::vector<double> negative = {1.0, -0.1};
  EXPECT_FALSE(LossEntropy(negative).ok());
}

TEST(EvaluateGlobalTest, UniformLogitsGiveLogCAndChanceAccuracy) {
  const int n = 2000, c = 4;
  Rng rng = MakeRng(1, Stream::kSbm);
  GcnModel m = InitGcnModel(3, 5, c, rng);
  m.w2.setZero();
  std::vector<int> labels(n);
  for (int& l : labels) l = static_cast<int>(rng() % c);
  std::vector<int> mask(n);
  std::iota(mask.begin(), mask.end(), 0);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(n, 3);
  ASSERT_OK_AND_ASSIGN(Evaluation e, EvaluateGlobal(m, NormalizeAdjacency(Adjacency(n)),
                                                    x, labels, mask));
  EXPECT_NEAR(e.loss, std::log(4.0), 1e-12);
  EXPECT_NEAR(e.accuracy, 0.25, 3 * std::sqrt(0.25 * 0.75 / n));
}

TEST(EvaluateGlobalTest, MemorizedTinyGraphIsPerfect) {
  const std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 2}, {3, 4},
                                                  {4, 5}};
  const NormalizedAdjacency a = NormalizeAdjacency(*Adjacency::FromEdges(6, edges));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(6, 6);
  const std::vector<int> labels = {0, 1, 0, 1, 0, 1};
  const std::vector<int> all = {0, 1, 2, 3, 4, 5};
  Rng rng = MakeRng(2, Stream::kModelInit);
  GcnModel m = InitGcnModel(6, 16, 2, rng);
  for (int step = 0; step < 2000; ++step) {
    const LossAndGradient lg = *LossAndGrad(m, a, x, labels, all);
    m = *SgdStep(m, lg.grads, 0.5);
  }
  ASSERT_OK_AND_ASSIGN(Evaluation e, EvaluateGlobal(m, a, x, labels, all));
  EXPECT_EQ(e.accuracy, 1.0);
  EXPECT_LT(e.loss, 0.1);
}

TEST(EvaluateGlobalTest, SingleNodeMask) {
  Rng rng = MakeRng(3, Stream::kModelInit);
  const GcnModel m = InitGcnModel(2, 3, 3, rng);
  const NormalizedAdjacency a = NormalizeAdjacency(Adjacency(4));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 2);
  const std::vector<int> labels = {0, 1, 2, 1};
  const std::vector<int> one = {2};
  ASSERT_OK_AND_ASSIGN(Evaluation e, EvaluateGlobal(m, a, x, labels, one));
  const ForwardCache c = *Forward(m, a, x);
  const Eigen::MatrixXd logp = LogSoftmax(c.logits);
  EXPECT_NEAR(e.loss, -logp(2, 2), 1e-15);
  Eigen::Index best;
  c.logits.row(2).maxCoeff(&best);
  EXPECT_EQ(e.accuracy, best == 2 ? 1.0 : 0.0);
}

RoundRecord Record(int round, std::vector<double> losses) {
  RoundRecord r;
  r.round = round;
  r.algorithm = "fedavg";
  r.test_loss = 0.1 * round + 1.0 / 3.0;
  r.test_acc = 0.5;
  r.client_losses = std::move(losses);
  EXPECT_OK(FillFairnessMetrics(r));
  return r;
}

TEST(RoundsCsvTest, HeaderAndRowLayout) {
  EXPECT_EQ(RoundsCsvHeader(2),
            "round,algorithm,test_loss,test_acc,loss_var,loss_entropy,"
            "client_0,client_1");
  const RoundRecord r = Record(1, {1.0, 3.0});
  EXPECT_THAT(RoundCsvRow(r), ::testing::StartsWith("1,fedavg,"));
  EXPECT_THAT(RoundCsvRow(r), ::testing::EndsWith(",1,3"));
}

TEST(RoundsCsvTest, RoundTripsBitwise) {
  const auto dir = test::ScratchDir("metrics_csv");
  const std::vector<RoundRecord> records = {
      Record(1, {0.1, 0.7, 1.0 / 7.0}), Record(2, {0.0, 0.0, 0.0}),
      Record(3, {2.5e-17, 1e300, 0.3})};
  ASSERT_OK(WriteRoundsCsv(dir / "rounds.csv", records, 3));
  ASSERT_OK_AND_ASSIGN(auto back, ReadRoundsCsv(dir / "rounds.csv"));
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].round, records[i].round);
    EXPECT_EQ(back[i].algorithm, records[i].algorithm);
    EXPECT_EQ(back[i].test_loss, records[i].test_loss);
    EXPECT_EQ(back[i].loss_var, records[i].loss_var);
    EXPECT_EQ(back[i].loss_entropy, records[i].loss_entropy);
    EXPECT_EQ(back[i].client_losses, records[i].client_losses);
    EXPECT_EQ(back[i].entropy_degenerate, records[i].entropy_degenerate);
  }
  EXPECT_TRUE(back[1].entropy_degenerate);
}

TEST(RoundsCsvTest, WrongWidthIsRejected) {
  const auto dir = test::ScratchDir("metrics_bad");
  const std::vector<RoundRecord> records = {Record(1, {0.1, 0.2})};
  EXPECT_FALSE(WriteRoundsCsv(dir / "r.csv", records, 3).ok());
  {
    std::ofstream out(dir / "bad.csv");
    out << RoundsCsvHeader(2) << "\n1,fedavg,0.1,0.5,0,0,1\n";
  }
  auto r = ReadRoundsCsv(dir / "bad.csv");
  ASSERT_FALSE(r.ok());
  EXPECT_THAT(std::string(r.status().message()), HasSubstr("line 2"));
}

TEST(RoundRecordTest, MeanClientLoss) {
  const RoundRecord r = Record(1, {1.0, 2.0, 6.0});
  EXPECT_DOUBLE_EQ(r.MeanClientLoss(), 3.0);
}

}  // namespace
}  // namespace fairgfl
