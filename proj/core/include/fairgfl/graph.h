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

#ifndef FAIRGFL_GRAPH_H_
#define FAIRGFL_GRAPH_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace fairgfl {

// Undirected, self-loop-free binary adjacency stored as sorted neighbor lists.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(int num_nodes) : neighbors_(num_nodes) {}

  // Builds a symmetric adjacency from an edge list. Self loops are dropped
  // and duplicate edges (in either orientation) collapse to one.
  static absl::StatusOr<Adjacency> FromEdges(
      int num_nodes, std::span<const std::pair<int, int>> edges);

  int num_nodes() const { return static_cast<int>(neighbors_.size()); }
  // Number of undirected edges.
  std::int64_t num_edges() const;
  // Number of nonzero entries of the symmetric matrix (2 * num_edges()).
  std::int64_t num_nonzeros() const { return 2 * num_edges(); }

  const std::vector<int>& neighbors(int node) const { return neighbors_[node]; }
  int degree(int node) const {
    return static_cast<int>(neighbors_[node].size());
  }
  bool HasEdge(int u, int v) const;

  // Edges as (u, v) with u < v, sorted lexicographically.
  std::vector<std::pair<int, int>> Edges() const;

  // Induced subgraph on `nodes`; node i of the result is nodes[i].
  Adjacency Induced(std::span<const int> nodes) const;

  Eigen::MatrixXd ToDense() const;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  std::vector<std::vector<int>> neighbors_;
};

// The global graph. Node ids are the dense row indices [0, num_nodes).
struct GlobalGraph {
  Eigen::MatrixXd features;  // num_nodes x feature_dim
  std::vector<int> labels;   // each in [0, num_classes)
  int num_classes = 0;
  Adjacency adjacency;
  // Identifiers as they appeared in the source files; empty for synthetic
  // graphs. external_ids[i] names node i.
  std::vector<std::string> external_ids;

  int num_nodes() const { return static_cast<int>(labels.size()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
};

absl::Status ValidateGraph(const GlobalGraph& graph);

// One party's view: the rows of the global graph for `node_ids` and the
// induced adjacency. Local index i corresponds to node_ids[i].
struct ClientSubgraph {
  int client_id = 0;
  std::vector<int> node_ids;  // sorted ascending, unique
  Eigen::MatrixXd features;
  std::vector<int> labels;
  Adjacency adjacency;

  int num_nodes() const { return static_cast<int>(node_ids.size()); }
};

// Restricts `graph` to `node_ids` (sorted and deduplicated here).
absl::StatusOr<ClientSubgraph> MakeClientSubgraph(const GlobalGraph& graph,
                                                  int client_id,
                                                  std::vector<int> node_ids);

struct LoadStats {
  std::int64_t edges_read = 0;
  std::int64_t dropped_unknown = 0;
  std::int64_t dropped_self_loops = 0;
};

// Loads a graph from a node file (`id f_1 .. f_d label` per row) and an edge
// file (`src dst` per row). Fields may be separated by whitespace, commas or
// tabs; blank lines and lines starting with '#' are skipped. Labels that are
// all non-negative integers are used as class indices; otherwise the distinct
// label strings are sorted and numbered. Edges naming unknown ids are dropped
// and counted in `stats`.
absl::StatusOr<GlobalGraph> LoadGraph(const std::filesystem::path& node_file,
                                      const std::filesystem::path& edge_file,
                                      LoadStats* stats = nullptr);

struct SbmSpec {
  int num_blocks = 7;
  int nodes_per_block = 60;
  double p_in = 0.1;
  double p_out = 0.01;
  int feature_dim = 32;
  // Per-dimension noise scale and the pairwise distance between block means
  // in units of that scale.
  double feature_sigma = 1.0;
  double mean_separation = 4.0;
  std::uint64_t seed = 0;
};

// Stochastic block model. Node v belongs to block v / nodes_per_block, which
// is also its label. Block means are mutually orthogonal with pairwise
// distance mean_separation * feature_sigma.
absl::StatusOr<GlobalGraph> GenerateSbm(const SbmSpec& spec);

enum class OverlapProfile {
  // Every client draws overlap volume from the same Dirichlet shares.
  kDirichlet,
  // Clients are split into three tiers receiving 0x, 1x and 2x the overlap
  // volume ("no", "low" and "high" overlap groups).
  kTiered,
};

struct PartitionSpec {
  int num_clients = 10;
  double overlap = 0.0;        // target average node overlap ratio in [0, 1)
  double pool_fraction = 0.3;  // share of nodes placed in the overlap pool
  double dirichlet_alpha_nonoverlap = 0.5;
  double dirichlet_alpha_overlap = 0.8;
  OverlapProfile profile = OverlapProfile::kDirichlet;
  // Non-overlap assignment is redrawn until every client holds at least this
  // many nodes.
  int min_client_nodes = 1;
  // When true, overlap demands are rescaled by a common multiplier so that
  // the expected average node overlap ratio equals `overlap`. When false the
  // raw N / (r - N r) scaling is used as is, which realizes a much smaller
  // average ratio than `overlap`.
  bool calibrate_overlap = true;
  std::uint64_t seed = 0;
};

absl::Status ValidatePartitionSpec(const PartitionSpec& spec);

// Scaling factor N / (r - N r) applied to overlap-pool volumes.
double OverlapScale(const PartitionSpec& spec);

// Splits `eligible` nodes (all nodes when empty) into overlapping client
// subgraphs. See partition.cc for the sampling procedure.
absl::StatusOr<std::vector<ClientSubgraph>> Partition(
    const GlobalGraph& graph, const PartitionSpec& spec,
    std::span<const int> eligible = {});

struct OverlapMatrices {
  Eigen::MatrixXd node;  // node(i, k) = |V_i ∩ V_k| / |V_i|
  Eigen::MatrixXd link;  // link(i, k) = |E_i ∩ E_k| / |E_i|, 0 if E_i empty
};

// Ground-truth overlap ratios. Diagonals are 1.
OverlapMatrices TrueOverlapMatrices(std::span<const ClientSubgraph> parts);

// Mean over clients of the mean off-diagonal entry in each row.
double AverageOverlapRatio(const Eigen::MatrixXd& ratios);

// Writes one `client_id node_id` row per membership.
absl::Status WritePartition(const std::filesystem::path& path,
                            std::span<const ClientSubgraph> parts);

}  // namespace fairgfl

#endif  // FAIRGFL_GRAPH_H_
