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

#include "fairgfl/suite.h"

#include <chrono>
#include <fstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "fairgfl/checkpoint.h"
#include "fairgfl/metrics.h"
#include "fairgfl/status_macros.h"

namespace fairgfl {
namespace {

constexpr double kOverlapLevels[] = {0.0, 0.05, 0.10, 0.15, 0.20};
constexpr double kPrivacyLevels[] = {1.0, 4.0, 50.0};

std::string Real(double v) { return absl::StrFormat("%.17g", v); }

std::string SeedLabel(std::uint64_t seed) {
  return absl::StrCat("seed_", seed);
}

absl::Status WriteText(const std::filesystem::path& path,
                       absl::string_view text) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) {
    return absl::UnavailableError(
        absl::StrCat("cannot open ", path.string(), " for writing"));
  }
  file << text;
  if (!file) return absl::DataLossError("write failed");
  return absl::OkStatus();
}

std::vector<double> TierLosses(const ExperimentConfig& config,
                               const RoundRecord& record) {
  if (config.partition.profile != OverlapProfile::kTiered) return {};
  const int p = config.partition.num_clients;
  std::vector<double> sum(3, 0.0);
  std::vector<int> count(3, 0);
  for (int i = 0; i < p; ++i) {
    const int tier = (i * 3) / p;
    sum[tier] += record.client_losses[i];
    ++count[tier];
  }
  for (int t = 0; t < 3; ++t) sum[t] = count[t] ? sum[t] / count[t] : 0.0;
  return sum;
}

}  // namespace

std::string SuiteName(SuiteKind kind) {
  switch (kind) {
    case SuiteKind::kSingle:
      return "single";
    case SuiteKind::kCompare:
      return "compare";
    case SuiteKind::kMotivation:
      return "motivation";
    case SuiteKind::kPrivacySweep:
      return "privacy-sweep";
    case SuiteKind::kOverlapSweep:
      return "overlap-sweep";
  }
  return "unknown";
}

absl::StatusOr<SuiteKind> ParseSuite(absl::string_view name) {
  for (SuiteKind k : {SuiteKind::kSingle, SuiteKind::kCompare,
                      SuiteKind::kMotivation, SuiteKind::kPrivacySweep,
                      SuiteKind::kOverlapSweep}) {
    if (name == SuiteName(k)) return k;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown suite '", name,
      "' (single, compare, motivation, privacy-sweep, overlap-sweep)"));
}

absl::StatusOr<GlobalGraph> LoadDataset(const ExperimentConfig& config) {
  if (config.dataset == DatasetKind::kSbm) return GenerateSbm(config.sbm);
  LoadStats stats;
  return LoadGraph(config.node_file, config.edge_file, &stats);
}

std::vector<RunPlan> PlanSuite(SuiteKind kind, const ExperimentConfig& base) {
  std::vector<RunPlan> plans;
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < base.num_seeds; ++s) seeds.push_back(base.fed.seed + s);
  auto with_seed = [](ExperimentConfig c, std::uint64_t seed) {
    SetSeed(c, seed);
    return c;
  };
  switch (kind) {
    case SuiteKind::kSingle:
      if (seeds.size() == 1) {
        plans.push_back({"", base});
      } else {
        for (std::uint64_t s : seeds) {
          plans.push_back({SeedLabel(s), with_seed(base, s)});
        }
      }
      break;
    case SuiteKind::kCompare:
      for (Algorithm a :
           {Algorithm::kFairGfl, Algorithm::kFedAvg, Algorithm::kQFedAvg}) {
        for (std::uint64_t s : seeds) {
          ExperimentConfig c = with_seed(base, s);
          c.fed.algorithm = a;
          plans.push_back(
              {absl::StrCat(AlgorithmName(a), "/", SeedLabel(s)), c});
        }
      }
      break;
    case SuiteKind::kMotivation:
      for (double n : kOverlapLevels) {
        for (std::uint64_t s : seeds) {
          ExperimentConfig c = with_seed(base, s);
          c.fed.algorithm = Algorithm::kFedAvg;
          c.partition.profile = OverlapProfile::kTiered;
          c.partition.overlap = n;
          plans.push_back({absl::StrCat("N_", n, "/", SeedLabel(s)), c});
        }
      }
      break;
    case SuiteKind::kPrivacySweep:
      for (double eps : kPrivacyLevels) {
        for (std::uint64_t s : seeds) {
          ExperimentConfig c = with_seed(base, s);
          c.fed.algorithm = Algorithm::kFairGfl;
          c.fed.ldp.enabled = true;
          c.fed.ldp.epsilon_a = eps;
          plans.push_back({absl::StrCat("eps_", eps, "/", SeedLabel(s)), c});
        }
      }
      break;
    case SuiteKind::kOverlapSweep:
      for (double n : kOverlapLevels) {
        for (Algorithm a : {Algorithm::kFairGfl, Algorithm::kFedAvg}) {
          for (std::uint64_t s : seeds) {
            ExperimentConfig c = with_seed(base, s);
            c.fed.algorithm = a;
            c.partition.overlap = n;
            plans.push_back({absl::StrCat("N_", n, "/", AlgorithmName(a),
                                          "/", SeedLabel(s)),
                             c});
          }
        }
      }
      break;
  }
  return plans;
}

absl::Status WriteOverlapCsv(const std::filesystem::path& path,
                             std::span<const OverlapSnapshot> snapshots) {
  std::string out;
  const int p =
      snapshots.empty() ? 0 : snapshots.front().state.num_clients();
  out = "round,matrix,row";
  for (int k = 0; k < p; ++k) absl::StrAppend(&out, ",c", k);
  out += "\n";
  for (const OverlapSnapshot& snap : snapshots) {
    const OverlapState& s = snap.state;
    const std::pair<const char*, const Eigen::MatrixXd*> matrices[] = {
        {"node_round", &s.node_round},
        {"link_round", &s.link_round},
        {"node_acc", &s.node_acc},
        {"link_acc", &s.link_acc},
        {"overall", &s.overall}};
    for (const auto& [name, m] : matrices) {
      for (int i = 0; i < p; ++i) {
        absl::StrAppend(&out, snap.round, ",", name, ",", i);
        for (int k = 0; k < p; ++k) absl::StrAppend(&out, ",", Real((*m)(i, k)));
        out += "\n";
      }
    }
  }
  return WriteText(path, out);
}

absl::StatusOr<SuiteResult> RunSuite(SuiteKind kind,
                                     const ExperimentConfig& base,
                                     const std::filesystem::path& out_dir) {
  RETURN_IF_ERROR(ValidateConfig(base));
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", out_dir.string(), ": ", ec.message()));
  }
  const std::vector<RunPlan> plans = PlanSuite(kind, base);

  std::string manifest = absl::StrCat("suite = ", SuiteName(kind), "\n");
  std::vector<std::string> labels;
  for (const RunPlan& plan : plans) {
    labels.push_back(plan.label.empty() ? "." : plan.label);
  }
  absl::StrAppend(&manifest, "runs = ", absl::StrJoin(labels, " "), "\n");
  absl::StrAppend(&manifest, "# resolved base config\n",
                  SerializeConfig(base));
  RETURN_IF_ERROR(WriteText(out_dir / "manifest.txt", manifest));

  SuiteResult result;
  std::string summary =
      "label,algorithm,seed,N,epsilon_a,ldp,rounds,test_loss,test_acc,"
      "loss_var,loss_entropy,mean_client_loss,tier0_loss,tier1_loss,"
      "tier2_loss,tau\n";
  for (const RunPlan& plan : plans) {
    const auto start = std::chrono::steady_clock::now();
    const std::string where =
        absl::StrCat("run ", plan.label.empty() ? "." : plan.label, ": ");
    auto graph = LoadDataset(plan.config);
    if (!graph.ok()) {
      return absl::Status(graph.status().code(),
                          absl::StrCat(where, graph.status().message()));
    }
    auto experiment =
        RunExperiment(*graph, plan.config.partition, plan.config.fed);
    if (!experiment.ok()) {
      return absl::Status(experiment.status().code(),
                          absl::StrCat(where, experiment.status().message()));
    }
    const std::filesystem::path dir = out_dir / plan.label;
    std::filesystem::create_directories(dir, ec);
    if (ec) return absl::UnavailableError(ec.message());
    RETURN_IF_ERROR(WriteRoundsCsv(dir / "rounds.csv", experiment->records,
                                   plan.config.fed.num_clients));
    const std::vector<NamedTensor> tensors =
        ModelTensors(experiment->final_model);
    RETURN_IF_ERROR(WriteCheckpoint(dir / "model.ckpt", tensors));
    if (!experiment->overlap.empty()) {
      std::filesystem::create_directories(dir / "overlap_estimates", ec);
      if (ec) return absl::UnavailableError(ec.message());
      RETURN_IF_ERROR(WriteOverlapCsv(
          dir / "overlap_estimates" / "estimates.csv", experiment->overlap));
    }

    RunSummary run;
    run.label = plan.label;
    run.algorithm = AlgorithmName(plan.config.fed.algorithm);
    run.seed = plan.config.fed.seed;
    run.overlap = plan.config.partition.overlap;
    run.epsilon_a = plan.config.fed.ldp.epsilon_a;
    run.ldp = plan.config.fed.ldp.enabled;
    run.tau = experiment->tau;
    if (!experiment->records.empty()) {
      run.final_round = experiment->records.back();
      run.mean_client_loss = run.final_round.MeanClientLoss();
      run.tier_losses = TierLosses(plan.config, run.final_round);
    }
    run.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();

    const RoundRecord& f = run.final_round;
    std::string run_summary = absl::StrCat(
        "label = ", labels[result.runs.size()], "\n",
        "algorithm = ", run.algorithm, "\n", "seed = ", run.seed, "\n",
        "rounds = ", experiment->records.size(), "\n",
        "test_loss = ", Real(f.test_loss), "\n",
        "test_acc = ", Real(f.test_acc), "\n",
        "loss_var = ", Real(f.loss_var), "\n",
        "loss_entropy = ", Real(f.loss_entropy), "\n",
        "mean_client_loss = ", Real(run.mean_client_loss), "\n",
        "tau = ", Real(run.tau), "\n");
    absl::StrAppend(&run_summary, "wall_time_ms = ",
                    absl::StrFormat("%.3f", run.wall_time_ms), "\n");
    RETURN_IF_ERROR(WriteText(dir / "summary.txt", run_summary));

    std::vector<double> tiers = run.tier_losses;
    tiers.resize(3, 0.0);
    absl::StrAppend(&summary, labels[result.runs.size()], ",", run.algorithm,
                    ",", run.seed, ",", Real(run.overlap), ",",
                    Real(run.epsilon_a), ",", run.ldp ? "on" : "off", ",",
                    experiment->records.size(), ",", Real(f.test_loss), ",",
                    Real(f.test_acc), ",", Real(f.loss_var), ",",
                    Real(f.loss_entropy), ",", Real(run.mean_client_loss),
                    ",", Real(tiers[0]), ",", Real(tiers[1]), ",",
                    Real(tiers[2]), ",", Real(run.tau), "\n");
    result.runs.push_back(std::move(run));
  }
  RETURN_IF_ERROR(WriteText(out_dir / "summary.csv", summary));
  return result;
}

}  // namespace fairgfl
