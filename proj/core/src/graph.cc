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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "fairgfl/random.h"

namespace fairgfl {

absl::StatusOr<Adjacency> Adjacency::FromEdges(
    int num_nodes, std::span<const std::pair<int, int>> edges) {
  if (num_nodes < 0) {
    return absl::InvalidArgumentError("negative node count");
  }
  Adjacency adj(num_nodes);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      return absl::InvalidArgumentError(
          absl::StrCat("edge (", u, ", ", v, ") out of range for ", num_nodes,
                       " nodes"));
    }
    if (u == v) continue;
    adj.neighbors_[u].push_back(v);
    adj.neighbors_[v].push_back(u);
  }
  for (auto& list : adj.neighbors_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

std::int64_t Adjacency::num_edges() const {
  std::int64_t total = 0;
  for (const auto& list : neighbors_) total += list.size();
  return total / 2;
}

bool Adjacency::HasEdge(int u, int v) const {
  const auto& list = neighbors_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<std::pair<int, int>> Adjacency::Edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(num_edges());
  for (int u = 0; u < num_nodes(); ++u) {
    for (int v : neighbors_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

Adjacency Adjacency::Induced(std::span<const int> nodes) const {
  std::unordered_map<int, int> local;
  local.reserve(nodes.size());
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    local.emplace(nodes[i], i);
  }
  Adjacency out(static_cast<int>(nodes.size()));
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    for (int v : neighbors_[nodes[i]]) {
      auto it = local.find(v);
      if (it != local.end()) out.neighbors_[i].push_back(it->second);
    }
    std::sort(out.neighbors_[i].begin(), out.neighbors_[i].end());
  }
  return out;
}

Eigen::MatrixXd Adjacency::ToDense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(num_nodes(), num_nodes());
  for (int u = 0; u < num_nodes(); ++u) {
    for (int v : neighbors_[u]) dense(u, v) = 1.0;
  }
  return dense;
}

absl::Status ValidateGraph(const GlobalGraph& graph) {
  const int n = graph.num_nodes();
  if (graph.features.rows() != n) {
    return absl::InvalidArgumentError(
        absl::StrCat("feature rows ", graph.features.rows(), " != ", n,
                     " labels"));
  }
  if (graph.adjacency.num_nodes() != n) {
    return absl::InvalidArgumentError("adjacency size does not match graph");
  }
  if (!graph.features.allFinite()) {
    return absl::InvalidArgumentError("non-finite feature value");
  }
  for (int v = 0; v < n; ++v) {
    const int label = graph.labels[v];
    if (label < 0 || label >= graph.num_classes) {
      return absl::InvalidArgumentError(
          absl::StrCat("label ", label, " of node ", v, " outside [0, ",
                       graph.num_classes, ")"));
    }
    for (int u : graph.adjacency.neighbors(v)) {
      if (u == v) return absl::InvalidArgumentError("self loop");
      if (!graph.adjacency.HasEdge(u, v)) {
        return absl::InvalidArgumentError("adjacency is not symmetric");
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ClientSubgraph> MakeClientSubgraph(const GlobalGraph& graph,
                                                  int client_id,
                                                  std::vector<int> node_ids) {
  std::sort(node_ids.begin(), node_ids.end());
  node_ids.erase(std::unique(node_ids.begin(), node_ids.end()),
                 node_ids.end());
  ClientSubgraph sub;
  sub.client_id = client_id;
  sub.features.resize(static_cast<Eigen::Index>(node_ids.size()),
                      graph.feature_dim());
  sub.labels.reserve(node_ids.size());
  for (int i = 0; i < static_cast<int>(node_ids.size()); ++i) {
    const int v = node_ids[i];
    if (v < 0 || v >= graph.num_nodes()) {
      return absl::InvalidArgumentError(
          absl::StrCat("node id ", v, " not in global graph"));
    }
    sub.features.row(i) = graph.features.row(v);
    sub.labels.push_back(graph.labels[v]);
  }
  sub.adjacency = graph.adjacency.Induced(node_ids);
  sub.node_ids = std::move(node_ids);
  return sub;
}

namespace {

std::vector<absl::string_view> Tokenize(absl::string_view line) {
  return absl::StrSplit(line, absl::ByAnyChar(" \t,\r"), absl::SkipEmpty());
}

bool SkipLine(absl::string_view line) {
  line = absl::StripLeadingAsciiWhitespace(line);
  return line.empty() || line.front() == '#';
}

absl::Status ParseError(const std::filesystem::path& file, int line_number,
                        absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat(
      "parse error in ", file.string(), " at line ", line_number, ": ", what));
}

}  // namespace

absl::StatusOr<GlobalGraph> LoadGraph(const std::filesystem::path& node_file,
                                      const std::filesystem::path& edge_file,
                                      LoadStats* stats) {
  std::ifstream nodes_in(node_file);
  if (!nodes_in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", node_file.string()));
  }
  std::ifstream edges_in(edge_file);
  if (!edges_in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", edge_file.string()));
  }

  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::unordered_map<std::string, int> index_of;
  int feature_dim = -1;
  std::string line;
  int line_number = 0;
  while (std::getline(nodes_in, line)) {
    ++line_number;
    if (SkipLine(line)) continue;
    const std::vector<absl::string_view> tokens = Tokenize(line);
    if (tokens.size() < 3) {
      return ParseError(node_file, line_number,
                        "expected `id f_1 .. f_d label`");
    }
    const int dim = static_cast<int>(tokens.size()) - 2;
    if (feature_dim < 0) feature_dim = dim;
    if (dim != feature_dim) {
      return ParseError(node_file, line_number,
                        absl::StrCat("expected ", feature_dim,
                                     " features, found ", dim));
    }
    std::vector<double> row(dim);
    for (int j = 0; j < dim; ++j) {
      if (!absl::SimpleAtod(tokens[j + 1], &row[j]) || !std::isfinite(row[j])) {
        return ParseError(node_file, line_number,
                          absl::StrCat("bad feature value '", tokens[j + 1],
                                       "'"));
      }
    }
    std::string id(tokens.front());
    if (!index_of.emplace(id, static_cast<int>(ids.size())).second) {
      return absl::InvalidArgumentError(absl::StrCat(
          "duplicate node id '", id, "' at line ", line_number, " of ",
          node_file.string()));
    }
    ids.push_back(std::move(id));
    rows.push_back(std::move(row));
    raw_labels.emplace_back(tokens.back());
  }
  if (ids.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat(node_file.string(), " contains no nodes"));
  }

  GlobalGraph graph;
  const int n = static_cast<int>(ids.size());
  graph.features.resize(n, feature_dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < feature_dim; ++j) graph.features(i, j) = rows[i][j];
  }

  bool numeric_labels = true;
  std::vector<int> numeric(n);
  for (int i = 0; i < n; ++i) {
    if (!absl::SimpleAtoi(raw_labels[i], &numeric[i]) || numeric[i] < 0) {
      numeric_labels = false;
      break;
    }
  }
  if (numeric_labels) {
    graph.labels = numeric;
    graph.num_classes = *std::max_element(numeric.begin(), numeric.end()) + 1;
  } else {
    std::map<std::string, int> label_index;
    for (const auto& l : raw_labels) label_index.emplace(l, 0);
    int next = 0;
    for (auto& [name, index] : label_index) index = next++;
    graph.labels.reserve(n);
    for (const auto& l : raw_labels) graph.labels.push_back(label_index[l]);
    graph.num_classes = next;
  }

  LoadStats local_stats;
  std::vector<std::pair<int, int>> edges;
  line_number = 0;
  while (std::getline(edges_in, line)) {
    ++line_number;
    if (SkipLine(line)) continue;
    const std::vector<absl::string_view> tokens = Tokenize(line);
    if (tokens.size() != 2) {
      return ParseError(edge_file, line_number, "expected `src dst`");
    }
    ++local_stats.edges_read;
    auto src = index_of.find(std::string(tokens[0]));
    auto dst = index_of.find(std::string(tokens[1]));
    if (src == index_of.end() || dst == index_of.end()) {
      ++local_stats.dropped_unknown;
      continue;
    }
    if (src->second == dst->second) {
      ++local_stats.dropped_self_loops;
      continue;
    }
    edges.emplace_back(src->second, dst->second);
  }
  auto adjacency = Adjacency::FromEdges(n, edges);
  if (!adjacency.ok()) return adjacency.status();
  graph.adjacency = *std::move(adjacency);
  graph.external_ids = std::move(ids);
  if (stats != nullptr) *stats = local_stats;
  return graph;
}

absl::StatusOr<GlobalGraph> GenerateSbm(const SbmSpec& spec) {
  if (spec.num_blocks < 1) {
    return absl::InvalidArgumentError("num_blocks must be >= 1");
  }
  if (spec.nodes_per_block < 2) {
    return absl::InvalidArgumentError("nodes_per_block must be >= 2");
  }
  if (!(spec.p_out >= 0.0 && spec.p_out <= spec.p_in && spec.p_in <= 1.0)) {
    return absl::InvalidArgumentError("require 0 <= p_out <= p_in <= 1");
  }
  if (spec.feature_dim < spec.num_blocks) {
    return absl::InvalidArgumentError(
        "feature_dim must be >= num_blocks for orthogonal block means");
  }
  if (!(spec.feature_sigma > 0.0) || !(spec.mean_separation >= 0.0)) {
    return absl::InvalidArgumentError(
        "feature_sigma must be positive and mean_separation non-negative");
  }

  Rng rng = MakeRng(spec.seed, Stream::kSbm);
  const int n = spec.num_blocks * spec.nodes_per_block;
  GlobalGraph graph;
  graph.num_classes = spec.num_blocks;
  graph.labels.resize(n);
  for (int v = 0; v < n; ++v) graph.labels[v] = v / spec.nodes_per_block;

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double p =
          graph.labels[u] == graph.labels[v] ? spec.p_in : spec.p_out;
      if (coin(rng) < p) edges.emplace_back(u, v);
    }
  }
  auto adjacency = Adjacency::FromEdges(n, edges);
  if (!adjacency.ok()) return adjacency.status();
  graph.adjacency = *std::move(adjacency);

  // Orthogonal means c * e_b are pairwise sqrt(2) * c apart.
  const double offset =
      spec.mean_separation * spec.feature_sigma / std::sqrt(2.0);
  std::normal_distribution<double> noise(0.0, spec.feature_sigma);
  graph.features.resize(n, spec.feature_dim);
  for (int v = 0; v < n; ++v) {
    for (int j = 0; j < spec.feature_dim; ++j) {
      graph.features(v, j) = noise(rng);
    }
    graph.features(v, graph.labels[v]) += offset;
  }
  return graph;
}

OverlapMatrices TrueOverlapMatrices(std::span<const ClientSubgraph> parts) {
  const int p = static_cast<int>(parts.size());
  OverlapMatrices out{Eigen::MatrixXd::Identity(p, p),
                      Eigen::MatrixXd::Identity(p, p)};
  // Edges keyed by global endpoints so that clients can be compared.
  std::vector<std::vector<std::pair<int, int>>> edge_sets(p);
  for (int i = 0; i < p; ++i) {
    for (const auto& [a, b] : parts[i].adjacency.Edges()) {
      const int u = parts[i].node_ids[a];
      const int v = parts[i].node_ids[b];
      edge_sets[i].emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(edge_sets[i].begin(), edge_sets[i].end());
  }
  for (int i = 0; i < p; ++i) {
    for (int k = 0; k < p; ++k) {
      if (i == k) continue;
      std::vector<int> shared;
      std::set_intersection(parts[i].node_ids.begin(), parts[i].node_ids.end(),
                            parts[k].node_ids.begin(), parts[k].node_ids.end(),
                            std::back_inserter(shared));
      out.node(i, k) = parts[i].node_ids.empty()
                           ? 0.0
                           : static_cast<double>(shared.size()) /
                                 static_cast<double>(parts[i].node_ids.size());
      std::vector<std::pair<int, int>> shared_edges;
      std::set_intersection(edge_sets[i].begin(), edge_sets[i].end(),
                            edge_sets[k].begin(), edge_sets[k].end(),
                            std::back_inserter(shared_edges));
      out.link(i, k) = edge_sets[i].empty()
                           ? 0.0
                           : static_cast<double>(shared_edges.size()) /
                                 static_cast<double>(edge_sets[i].size());
    }
  }
  return out;
}

double AverageOverlapRatio(const Eigen::MatrixXd& ratios) {
  const Eigen::Index p = ratios.rows();
  if (p < 2) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    double row = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k != i) row += ratios(i, k);
    }
    total += row / static_cast<double>(p - 1);
  }
  return total / static_cast<double>(p);
}

absl::Status WritePartition(const std::filesystem::path& path,
                            std::span<const ClientSubgraph> parts) {
  std::ofstream out(path);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot write ", path.string()));
  }
  for (const auto& part : parts) {
    for (int v : part.node_ids) out << part.client_id << ' ' << v << '\n';
  }
  if (!out) return absl::DataLossError("write failed");
  return absl::OkStatus();
}

}  // namespace fairgfl
