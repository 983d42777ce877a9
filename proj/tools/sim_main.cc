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

// Experiment runner.
//
//   sim run --config FILE --suite NAME --out DIR [overrides...]
//   sim keys

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fairgfl/config.h"
#include "fairgfl/suite.h"

namespace {

constexpr int kUsageError = 2;
constexpr int kRunError = 1;

struct RunFlags {
  std::string config_path;
  std::string suite = "single";
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algorithm;
  bool no_ldp = false;
  bool literal_aggregation = false;
  bool renormalize = false;
  std::optional<std::string> estimator;
  std::optional<double> epsilon_a;
  std::optional<double> epsilon_b;
  std::optional<int> quantiles;
  std::optional<int> encoder_dim;
  std::optional<std::string> permanent_cache;
  std::vector<std::string> sets;
};

absl::Status ApplyFlags(const RunFlags& flags,
                        fairgfl::ExperimentConfig& config) {
  using fairgfl::ApplyOverride;
  auto apply = [&config](absl::string_view key,
                         const std::string& value) -> absl::Status {
    return ApplyOverride(config, key, value);
  };
  for (const std::string& kv : flags.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("--set expects key=value, got '", kv, "'"));
    }
    if (auto s = apply(kv.substr(0, eq), kv.substr(eq + 1)); !s.ok()) {
      return s;
    }
  }
  absl::Status s;
  if (flags.seed) fairgfl::SetSeed(config, *flags.seed);
  if (flags.algorithm && !(s = apply("algorithm", *flags.algorithm)).ok()) {
    return s;
  }
  if (flags.no_ldp) config.fed.ldp.enabled = false;
  if (flags.literal_aggregation) config.fed.literal_aggregation = true;
  if (flags.renormalize) config.fed.renormalize = true;
  if (flags.estimator && !(s = apply("estimator", *flags.estimator)).ok()) {
    return s;
  }
  if (flags.epsilon_a) config.fed.ldp.epsilon_a = *flags.epsilon_a;
  if (flags.epsilon_b) config.fed.ldp.epsilon_b = *flags.epsilon_b;
  if (flags.quantiles) config.fed.ldp.quantiles = *flags.quantiles;
  if (flags.encoder_dim) config.fed.encoder_dim = *flags.encoder_dim;
  if (flags.permanent_cache &&
      !(s = apply("permanent_cache", *flags.permanent_cache)).ok()) {
    return s;
  }
  return fairgfl::ValidateConfig(config);
}

int Run(const RunFlags& flags) {
  auto suite = fairgfl::ParseSuite(flags.suite);
  if (!suite.ok()) {
    std::cerr << "error: " << suite.status().message() << "\n";
    return kUsageError;
  }
  fairgfl::ExperimentConfig config;
  if (!flags.config_path.empty()) {
    auto parsed = fairgfl::ParseConfigFile(flags.config_path);
    if (!parsed.ok()) {
      std::cerr << "error: " << parsed.status().message() << "\n";
      return kUsageError;
    }
    config = *std::move(parsed);
  }
  if (absl::Status s = ApplyFlags(flags, config); !s.ok()) {
    std::cerr << "error: " << s.message() << "\n";
    return kUsageError;
  }
  auto result = fairgfl::RunSuite(*suite, config, flags.out_dir);
  if (!result.ok()) {
    std::cerr << "error: " << result.status().message() << "\n";
    return kRunError;
  }
  for (const fairgfl::RunSummary& run : result->runs) {
    const fairgfl::RoundRecord& f = run.final_round;
    std::cout << (run.label.empty() ? "." : run.label) << ": round "
              << f.round << " test_acc=" << f.test_acc
              << " test_loss=" << f.test_loss << " loss_var=" << f.loss_var
              << " loss_entropy=" << f.loss_entropy << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated graph learning simulator"};
  app.require_subcommand(1);

  RunFlags flags;
  CLI::App* run = app.add_subcommand("run", "Run an experiment suite");
  run->add_option("--config", flags.config_path,
                  "key = value config file (defaults when omitted)");
  run->add_option("--suite", flags.suite,
                  "single | compare | motivation | privacy-sweep | "
                  "overlap-sweep")
      ->capture_default_str();
  run->add_option("--out", flags.out_dir, "Output directory")->required();
  run->add_option("--seed", flags.seed, "Experiment seed");
  run->add_option("--algorithm", flags.algorithm,
                  "fairgfl | fedavg | qfedavg");
  run->add_flag("--no-ldp", flags.no_ldp,
                "Send snapped node vectors and true links");
  run->add_flag("--literal-aggregation", flags.literal_aggregation,
                "Aggregate weighted parameters instead of updates");
  run->add_flag("--renormalize", flags.renormalize,
                "Normalize fairness weights to sum to 1");
  run->add_option("--estimator", flags.estimator, "corrected | cross | squared");
  run->add_option("--epsilon-a", flags.epsilon_a, "Node privacy budget");
  run->add_option("--epsilon-b", flags.epsilon_b, "Link privacy budget");
  run->add_option("--quantiles", flags.quantiles, "Node grid size p");
  run->add_option("--encoder-dim", flags.encoder_dim, "Encoded dimension");
  run->add_option("--permanent-cache", flags.permanent_cache, "on | off");
  run->add_option("--set", flags.sets,
                  "Override any config key, e.g. --set J=20");

  CLI::App* keys = app.add_subcommand("keys", "List config keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }
  if (keys->parsed()) {
    fairgfl::ExperimentConfig defaults;
    std::cout << fairgfl::SerializeConfig(defaults);
    return 0;
  }
  return Run(flags);
}
