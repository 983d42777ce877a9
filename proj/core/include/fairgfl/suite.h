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

#ifndef FAIRGFL_SUITE_H_
#define FAIRGFL_SUITE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fairgfl/config.h"
#include "fairgfl/federation.h"
#include "fairgfl/graph.h"

namespace fairgfl {

enum class SuiteKind {
  kSingle,        // one run of the config as given
  kCompare,       // fairgfl, fedavg and qfedavg on the same partitions
  kMotivation,    // fedavg on tiered overlaps, N in {0, .05, .1, .15, .2}
  kPrivacySweep,  // fairgfl with epsilon_a in {1, 4, 50}
  kOverlapSweep,  // fairgfl and fedavg, N in {0, .05, .1, .15, .2}
};

std::string SuiteName(SuiteKind kind);
absl::StatusOr<SuiteKind> ParseSuite(absl::string_view name);

// The SBM or the file graph named by the config.
absl::StatusOr<GlobalGraph> LoadDataset(const ExperimentConfig& config);

// One experiment of a suite.
struct RunPlan {
  std::string label;  // output subdirectory, empty for a single run
  ExperimentConfig config;
};

std::vector<RunPlan> PlanSuite(SuiteKind kind, const ExperimentConfig& base);

struct RunSummary {
  std::string label;
  std::string algorithm;
  std::uint64_t seed = 0;
  double overlap = 0.0;
  double epsilon_a = 0.0;
  bool ldp = true;
  RoundRecord final_round;
  double mean_client_loss = 0.0;
  // Mean final loss of the no/low/high overlap tiers (tiered profile only).
  std::vector<double> tier_losses;
  double tau = 0.0;
  double wall_time_ms = 0.0;
};

struct SuiteResult {
  std::vector<RunSummary> runs;
};

// Runs every planned experiment and writes, under `out_dir`:
//   manifest.txt                 suite name, run labels and resolved config
//   summary.csv                  final-round metrics, one row per run
//   <label>/rounds.csv           one row per round
//   <label>/summary.txt          final-round metrics as key = value
//   <label>/overlap_estimates/estimates.csv   fairgfl runs only
// A run that fails stops the suite with its error.
absl::StatusOr<SuiteResult> RunSuite(SuiteKind kind,
                                     const ExperimentConfig& base,
                                     const std::filesystem::path& out_dir);

// Long-format dump of the overlap matrices after every round:
// round,matrix,row,c0..c{P-1} with matrix in
// {node_round, link_round, node_acc, link_acc, overall}.
absl::Status WriteOverlapCsv(const std::filesystem::path& path,
                             std::span<const OverlapSnapshot> snapshots);

}  // namespace fairgfl

#endif  // FAIRGFL_SUITE_H_
