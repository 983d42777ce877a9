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
#include "fairgfl/graph.h"

#include <cmath>
#include <fstream>
#include <utility>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fairgfl {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

TEST(AdjacencyTest, FromEdgesSymmetrizesAndDeduplicates) {
  const std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 0}, {1, 2},
                                                  {2, 2}};
  ASSERT_OK_AND_ASSIGN(Adjacency adj, Adjacency::FromEdges(3, edges));
  EXPECT_EQ(adj.num_edges(), 2);
  EXPECT_EQ(adj.num_nonzeros(), 4);
  EXPECT_TRUE(adj.HasEdge(1, 0));
  EXPECT_FALSE(adj.HasEdge(2, 2));
  EXPECT_THAT(adj.Edges(), ElementsAre(std::pair(0, 1), std::pair(1, 2)));
  const Eigen::MatrixXd dense = adj.ToDense();
  EXPECT_TRUE(dense.isApprox(dense.transpose()));
  EXPECT_EQ(dense.diagonal().sum(), 0.0);
}

TEST(AdjacencyTest, RejectsOutOfRangeEdge) {
  const std::vector<std::pair<int, int>> edges = {{0, 3}};
  EXPECT_FALSE(Adjacency::FromEdges(3, edges).ok());
}

TEST(AdjacencyTest, InducedKeepsOnlyInternalEdges) {
  const std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 2}, {2, 3}};
  ASSERT_OK_AND_ASSIGN(Adjacency adj, Adjacency::FromEdges(4, edges));
  const std::vector<int> nodes = {1, 2, 3};
  const Adjacency sub = adj.Induced(nodes);
  EXPECT_EQ(sub.num_nodes(), 3);
  EXPECT_THAT(sub.Edges(), ElementsAre(std::pair(0, 1), std::pair(1, 2)));
}

class LoadGraphTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = test::ScratchDir("load_graph"); }
  std::filesystem::path dir_;
};

TEST_F(LoadGraphTest, ThreeNodePathIsSymmetrized) {
  WriteFile(dir_ / "n", "a 1 0 x\nb 0 1 y\nc 1 1 x\n");
  WriteFile(dir_ / "e", "a b\nb c\n");
  ASSERT_OK_AND_ASSIGN(GlobalGraph g, LoadGraph(dir_ / "n", dir_ / "e"));
  EXPECT_EQ(g.num_nodes(), 3);
  EXPECT_EQ(g.feature_dim(), 2);
  EXPECT_EQ(g.num_classes, 2);
  EXPECT_THAT(g.labels, ElementsAre(0, 1, 0));
  EXPECT_EQ(g.adjacency.num_nonzeros(), 4);
  EXPECT_OK(ValidateGraph(g));
}

TEST_F(LoadGraphTest, SelfLoopAndUnknownIdsAreDroppedAndCounted) {
  WriteFile(dir_ / "n", "0 1.5 0\n1 2.5 1\n");
  WriteFile(dir_ / "e", "0 0\n0 1\n0 7\n");
  LoadStats stats;
  ASSERT_OK_AND_ASSIGN(GlobalGraph g,
                       LoadGraph(dir_ / "n", dir_ / "e", &stats));
  EXPECT_EQ(g.adjacency.num_edges(), 1);
  EXPECT_EQ(g.adjacency.ToDense().diagonal().sum(), 0.0);
  EXPECT_EQ(stats.edges_read, 3);
  EXPECT_EQ(stats.dropped_self_loops, 1);
  EXPECT_EQ(stats.dropped_unknown, 1);
}

// Tab-separated content/cites layout with string ids and class names.
TEST_F(LoadGraphTest, ContentCitesLayout) {
  std::string content;
  const char* classes[] = {"Neural_Networks", "Theory", "Rule_Learning"};
  for (int i = 0; i < 30; ++i) {
    content += "p" + std::to_string(1000 + i);
    for (int j = 0; j < 12; ++j) content += (i + j) % 5 == 0 ? "\t1" : "\t0";
    content += std::string("\t") + classes[i % 3] + "\n";
  }
  std::string cites;
  for (int i = 0; i + 1 < 30; ++i) {
    cites += "p" + std::to_string(1000 + i) + "\tp" +
             std::to_string(1001 + i) + "\n";
  }
  WriteFile(dir_ / "x.content", content);
  WriteFile(dir_ / "x.cites", cites);
  ASSERT_OK_AND_ASSIGN(GlobalGraph g,
                       LoadGraph(dir_ / "x.content", dir_ / "x.cites"));
  EXPECT_EQ(g.num_nodes(), 30);
  EXPECT_EQ(g.feature_dim(), 12);
  EXPECT_EQ(g.num_classes, 3);
  EXPECT_EQ(g.adjacency.num_edges(), 29);
  EXPECT_EQ(g.external_ids[5], "p1005");
}

TEST_F(LoadGraphTest, MalformedRowReportsLineNumber) {
  WriteFile(dir_ / "n", "0 1 0\n1 oops 1\n");
  WriteFile(dir_ / "e", "");
  auto g = LoadGraph(dir_ / "n", dir_ / "e");
  ASSERT_FALSE(g.ok());
  EXPECT_THAT(std::string(g.status().message()), HasSubstr("line 2"));
}

TEST_F(LoadGraphTest, DuplicateIdIsRejected) {
  WriteFile(dir_ / "n", "0 1 0\n0 2 1\n");
  WriteFile(dir_ / "e", "");
  auto g = LoadGraph(dir_ / "n", dir_ / "e");
  ASSERT_FALSE(g.ok());
  EXPECT_THAT(std::string(g.status().message()), HasSubstr("duplicate"));
}

TEST_F(LoadGraphTest, MissingFileIsNotFound) {
  auto g = LoadGraph(dir_ / "absent", dir_ / "absent2");
  EXPECT_EQ(g.status().code(), absl::StatusCode::kNotFound);
}

TEST(GenerateSbmTest, DegenerateProbabilitiesGiveTwoTriangles) {
  SbmSpec spec;
  spec.num_blocks = 2;
  spec.nodes_per_block = 3;
  spec.p_in = 1.0;
  spec.p_out = 0.0;
  ASSERT_OK_AND_ASSIGN(GlobalGraph g, GenerateSbm(spec));
  EXPECT_EQ(g.num_nodes(), 6);
  EXPECT_EQ(g.adjacency.num_edges(), 6);
  for (int u = 0; u < 6; ++u) {
    for (int v = 0; v < 6; ++v) {
      if (u == v) continue;
      EXPECT_EQ(g.adjacency.HasEdge(u, v), g.labels[u] == g.labels[v]);
    }
  }
}

TEST(GenerateSbmTest, EdgeCountMatchesBinomialMean) {
  SbmSpec spec;
  spec.num_blocks = 3;
  spec.nodes_per_block = 20;
  spec.p_in = 0.1;
  spec.p_out = 0.1;
  const double n = 60;
  const double pairs = n * (n - 1) / 2;
  double total = 0.0;
  constexpr int kSeeds = 100;
  for (int s = 0; s < kSeeds; ++s) {
    spec.seed = s;
    ASSERT_OK_AND_ASSIGN(GlobalGraph g, GenerateSbm(spec));
    total += g.adjacency.num_edges();
  }
  const double mean = total / kSeeds;
  const double sigma = std::sqrt(pairs * 0.1 * 0.9 / kSeeds);
  EXPECT_NEAR(mean, 0.1 * pairs, 3 * sigma);
}

TEST(GenerateSbmTest, SameSeedSameGraph) {
  SbmSpec spec;
  spec.seed = 11;
  ASSERT_OK_AND_ASSIGN(GlobalGraph a, GenerateSbm(spec));
  ASSERT_OK_AND_ASSIGN(GlobalGraph b, GenerateSbm(spec));
  EXPECT_EQ(a.adjacency, b.adjacency);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  spec.seed = 12;
  ASSERT_OK_AND_ASSIGN(GlobalGraph c, GenerateSbm(spec));
  EXPECT_FALSE(a.features == c.features);
}

TEST(GenerateSbmTest, BlockMeansAreSeparated) {
  SbmSpec spec;
  spec.nodes_per_block = 200;
  ASSERT_OK_AND_ASSIGN(GlobalGraph g, GenerateSbm(spec));
  std::vector<Eigen::RowVectorXd> means(
      spec.num_blocks, Eigen::RowVectorXd::Zero(spec.feature_dim));
  std::vector<int> counts(spec.num_blocks, 0);
  for (int v = 0; v < g.num_nodes(); ++v) {
    means[g.labels[v]] += g.features.row(v);
    ++counts[g.labels[v]];
  }
  for (int c = 0; c < spec.num_blocks; ++c) means[c] /= counts[c];
  for (int a = 0; a < spec.num_blocks; ++a) {
    for (int b = a + 1; b < spec.num_blocks; ++b) {
      // Sampling error of each mean is about sqrt(d / 200) ~ 0.4.
      EXPECT_GT((means[a] - means[b]).norm(), 3.0);
    }
  }
}

TEST(GenerateSbmTest, InvalidSpecIsRejected) {
  SbmSpec spec;
  spec.p_in = 1.5;
  EXPECT_FALSE(GenerateSbm(spec).ok());
}

GlobalGraph PathGraph(int n) {
  GlobalGraph g;
  g.features = Eigen::MatrixXd::Zero(n, 1);
  g.labels.assign(n, 0);
  g.num_classes = 1;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  g.adjacency = *Adjacency::FromEdges(n, edges);
  return g;
}

ClientSubgraph Sub(const GlobalGraph& g, int id, std::vector<int> nodes) {
  return *MakeClientSubgraph(g, id, std::move(nodes));
}

TEST(TrueOverlapTest, HandBuiltSets) {
  const GlobalGraph g = PathGraph(8);
  const std::vector<ClientSubgraph> parts = {
      Sub(g, 0, {0, 1, 2, 3}), Sub(g, 1, {2, 3, 4, 5}), Sub(g, 2, {6, 7})};
  const OverlapMatrices m = TrueOverlapMatrices(parts);
  EXPECT_DOUBLE_EQ(m.node(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(m.node(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.node(0, 2), 0.0);
  // Edges 0-1,1-2,2-3 vs 2-3,3-4,4-5 share 2-3.
  EXPECT_DOUBLE_EQ(m.link(0, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.link(2, 0), 0.0);
}

TEST(TrueOverlapTest, IdenticalSubgraphsGiveOnes) {
  const GlobalGraph g = PathGraph(5);
  const std::vector<ClientSubgraph> parts = {Sub(g, 0, {0, 1, 2}),
                                             Sub(g, 1, {0, 1, 2})};
  const OverlapMatrices m = TrueOverlapMatrices(parts);
  EXPECT_EQ(m.node(0, 1), 1.0);
  EXPECT_EQ(m.link(1, 0), 1.0);
}

TEST(TrueOverlapTest, DisjointSubgraphsGiveZeros) {
  const GlobalGraph g = PathGraph(6);
  const std::vector<ClientSubgraph> parts = {Sub(g, 0, {0, 1, 2}),
                                             Sub(g, 1, {3, 4, 5})};
  const OverlapMatrices m = TrueOverlapMatrices(parts);
  EXPECT_EQ(m.node(0, 1), 0.0);
  EXPECT_EQ(m.node(1, 0), 0.0);
  EXPECT_EQ(m.link(0, 1), 0.0);
  EXPECT_EQ(m.link(1, 0), 0.0);
  // Self-overlap convention.
  EXPECT_EQ(m.node(0, 0), 1.0);
}

TEST(TrueOverlapTest, EdgelessClientHasZeroLinkRatio) {
  const GlobalGraph g = PathGraph(6);
  const std::vector<ClientSubgraph> parts = {Sub(g, 0, {0, 2, 4}),
                                             Sub(g, 1, {0, 1, 2})};
  const OverlapMatrices m = TrueOverlapMatrices(parts);
  EXPECT_EQ(m.link(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(m.node(0, 1), 2.0 / 3.0);
}

TEST(MakeClientSubgraphTest, SortsAndDeduplicatesIds) {
  const GlobalGraph g = PathGraph(5);
  ASSERT_OK_AND_ASSIGN(ClientSubgraph d, MakeClientSubgraph(g, 0, {1, 1}));
  EXPECT_THAT(d.node_ids, ElementsAre(1));
  EXPECT_FALSE(MakeClientSubgraph(g, 0, {9}).ok());
  ASSERT_OK_AND_ASSIGN(ClientSubgraph s, MakeClientSubgraph(g, 3, {4, 2, 3}));
  EXPECT_THAT(s.node_ids, ElementsAre(2, 3, 4));
  EXPECT_EQ(s.adjacency.num_edges(), 2);
}

}  // namespace
}  // namespace fairgfl
