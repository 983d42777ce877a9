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

#include "fairgfl/config.h"

#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "fairgfl/status_macros.h"

namespace fairgfl {
namespace {

struct Field {
  std::string name;
  std::string type;  // shown in type errors
  std::function<bool(ExperimentConfig&, absl::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
using Ref = std::function<T&(ExperimentConfig&)>;

std::string FormatReal(double v) { return absl::StrFormat("%.17g", v); }

Field IntField(std::string name, Ref<int> ref) {
  return {std::move(name), "integer",
          [ref](ExperimentConfig& c, absl::string_view v) {
            return absl::SimpleAtoi(v, &ref(c));
          },
          [ref](const ExperimentConfig& c) {
            return absl::StrCat(ref(const_cast<ExperimentConfig&>(c)));
          }};
}

Field RealField(std::string name, Ref<double> ref) {
  return {std::move(name), "real number",
          [ref](ExperimentConfig& c, absl::string_view v) {
            return absl::SimpleAtod(v, &ref(c));
          },
          [ref](const ExperimentConfig& c) {
            return FormatReal(ref(const_cast<ExperimentConfig&>(c)));
          }};
}

Field BoolField(std::string name, Ref<bool> ref) {
  return {std::move(name), "boolean (true/false/on/off)",
          [ref](ExperimentConfig& c, absl::string_view v) {
            const std::string s = absl::AsciiStrToLower(v);
            if (s == "on" || s == "yes") {
              ref(c) = true;
              return true;
            }
            if (s == "off" || s == "no") {
              ref(c) = false;
              return true;
            }
            return absl::SimpleAtob(s, &ref(c));
          },
          [ref](const ExperimentConfig& c) -> std::string {
            return ref(const_cast<ExperimentConfig&>(c)) ? "true" : "false";
          }};
}

Field StringField(std::string name, Ref<std::string> ref) {
  return {std::move(name), "string",
          [ref](ExperimentConfig& c, absl::string_view v) {
            ref(c) = std::string(v);
            return true;
          },
          [ref](const ExperimentConfig& c) {
            return ref(const_cast<ExperimentConfig&>(c));
          }};
}

template <typename E>
Field EnumField(std::string name,
                std::vector<std::pair<std::string, E>> choices, Ref<E> ref) {
  std::vector<std::string> names;
  for (const auto& [n, e] : choices) names.push_back(n);
  return {std::move(name), absl::StrCat("one of ", absl::StrJoin(names, "|")),
          [ref, choices](ExperimentConfig& c, absl::string_view v) {
            for (const auto& [n, e] : choices) {
              if (v == n) {
                ref(c) = e;
                return true;
              }
            }
            return false;
          },
          [ref, choices](const ExperimentConfig& c) -> std::string {
            const E value = ref(const_cast<ExperimentConfig&>(c));
            for (const auto& [n, e] : choices) {
              if (e == value) return n;
            }
            return "?";
          }};
}

const std::vector<Field>& Fields() {
  static const std::vector<Field>* fields = [] {
    using C = ExperimentConfig;
    auto* f = new std::vector<Field>;
    // Federation.
    f->push_back({"P", "integer",
                  [](C& c, absl::string_view v) {
                    int p = 0;
                    if (!absl::SimpleAtoi(v, &p)) return false;
                    SetNumClients(c, p);
                    return true;
                  },
                  [](const C& c) { return absl::StrCat(c.fed.num_clients); }});
    f->push_back(IntField("K", [](C& c) -> int& {
      return c.fed.clients_per_round;
    }));
    f->push_back(IntField("E", [](C& c) -> int& { return c.fed.local_steps; }));
    f->push_back(IntField("J", [](C& c) -> int& { return c.fed.rounds; }));
    f->push_back(RealField("lr", [](C& c) -> double& { return c.fed.lr; }));
    f->push_back(IntField("b", [](C& c) -> int& { return c.fed.batch_size; }));
    f->push_back(
        RealField("lambda", [](C& c) -> double& { return c.fed.lambda; }));
    f->push_back(
        RealField("alpha", [](C& c) -> double& { return c.fed.alpha; }));
    f->push_back(RealField("beta", [](C& c) -> double& { return c.fed.beta; }));
    f->push_back(EnumField<Algorithm>(
        "algorithm",
        {{"fairgfl", Algorithm::kFairGfl},
         {"fedavg", Algorithm::kFedAvg},
         {"qfedavg", Algorithm::kQFedAvg}},
        [](C& c) -> Algorithm& { return c.fed.algorithm; }));
    f->push_back(RealField("q", [](C& c) -> double& { return c.fed.q; }));
    f->push_back({"seed", "non-negative integer",
                  [](C& c, absl::string_view v) {
                    std::uint64_t s = 0;
                    if (!absl::SimpleAtoi(v, &s)) return false;
                    SetSeed(c, s);
                    return true;
                  },
                  [](const C& c) { return absl::StrCat(c.fed.seed); }});
    f->push_back(IntField("num_seeds", [](C& c) -> int& {
      return c.num_seeds;
    }));
    f->push_back(IntField("hidden_dim", [](C& c) -> int& {
      return c.fed.hidden_dim;
    }));
    f->push_back(EnumField<EstimatorMode>(
        "estimator",
        {{"corrected", EstimatorMode::kCorrected},
         {"cross", EstimatorMode::kCrossScale},
         {"squared", EstimatorMode::kSquaredScale}},
        [](C& c) -> EstimatorMode& { return c.fed.estimator; }));
    f->push_back(BoolField("literal_aggregation", [](C& c) -> bool& {
      return c.fed.literal_aggregation;
    }));
    f->push_back(BoolField("renormalize", [](C& c) -> bool& {
      return c.fed.renormalize;
    }));
    f->push_back(EnumField<OverlapSource>(
        "overlap_source",
        {{"estimated", OverlapSource::kEstimated},
         {"zero", OverlapSource::kZero},
         {"oracle", OverlapSource::kOracle}},
        [](C& c) -> OverlapSource& { return c.fed.overlap_source; }));
    f->push_back(RealField("test_fraction", [](C& c) -> double& {
      return c.fed.test_fraction;
    }));
    f->push_back(RealField("public_fraction", [](C& c) -> double& {
      return c.fed.public_fraction;
    }));
    // Sanitization and matching.
    f->push_back(BoolField("ldp", [](C& c) -> bool& {
      return c.fed.ldp.enabled;
    }));
    f->push_back(RealField("epsilon_a", [](C& c) -> double& {
      return c.fed.ldp.epsilon_a;
    }));
    f->push_back(RealField("epsilon_b", [](C& c) -> double& {
      return c.fed.ldp.epsilon_b;
    }));
    f->push_back(IntField("quantiles", [](C& c) -> int& {
      return c.fed.ldp.quantiles;
    }));
    f->push_back(IntField("encoder_dim", [](C& c) -> int& {
      return c.fed.encoder_dim;
    }));
    f->push_back(IntField("encoder_epochs", [](C& c) -> int& {
      return c.fed.encoder_epochs;
    }));
    f->push_back(BoolField("permanent_cache", [](C& c) -> bool& {
      return c.fed.permanent_cache;
    }));
    f->push_back(IntField("upload_batch", [](C& c) -> int& {
      return c.fed.upload_batch;
    }));
    f->push_back(RealField("tau", [](C& c) -> double& { return c.fed.tau; }));
    f->push_back(EnumField<ThresholdRule>(
        "tau_rule",
        {{"distinct", ThresholdRule::kDistinctDistance},
         {"self", ThresholdRule::kSelfDistance}},
        [](C& c) -> ThresholdRule& { return c.fed.tau_rule; }));
    f->push_back(RealField("tau_quantile", [](C& c) -> double& {
      return c.fed.tau_quantile;
    }));
    // Partition.
    f->push_back(RealField("N", [](C& c) -> double& {
      return c.partition.overlap;
    }));
    f->push_back(RealField("r", [](C& c) -> double& {
      return c.partition.pool_fraction;
    }));
    f->push_back(RealField("dirichlet_alpha_nonoverlap", [](C& c) -> double& {
      return c.partition.dirichlet_alpha_nonoverlap;
    }));
    f->push_back(RealField("dirichlet_alpha_overlap", [](C& c) -> double& {
      return c.partition.dirichlet_alpha_overlap;
    }));
    f->push_back(EnumField<OverlapProfile>(
        "overlap_profile",
        {{"dirichlet", OverlapProfile::kDirichlet},
         {"tiered", OverlapProfile::kTiered}},
        [](C& c) -> OverlapProfile& { return c.partition.profile; }));
    f->push_back(IntField("min_client_nodes", [](C& c) -> int& {
      return c.partition.min_client_nodes;
    }));
    f->push_back(BoolField("calibrate_overlap", [](C& c) -> bool& {
      return c.partition.calibrate_overlap;
    }));
    // Dataset.
    f->push_back(EnumField<DatasetKind>(
        "dataset", {{"sbm", DatasetKind::kSbm}, {"file", DatasetKind::kFile}},
        [](C& c) -> DatasetKind& { return c.dataset; }));
    f->push_back(StringField("node_file", [](C& c) -> std::string& {
      return c.node_file;
    }));
    f->push_back(StringField("edge_file", [](C& c) -> std::string& {
      return c.edge_file;
    }));
    f->push_back(IntField("sbm_blocks", [](C& c) -> int& {
      return c.sbm.num_blocks;
    }));
    f->push_back(IntField("sbm_nodes_per_block", [](C& c) -> int& {
      return c.sbm.nodes_per_block;
    }));
    f->push_back(RealField("sbm_p_in", [](C& c) -> double& {
      return c.sbm.p_in;
    }));
    f->push_back(RealField("sbm_p_out", [](C& c) -> double& {
      return c.sbm.p_out;
    }));
    f->push_back(IntField("sbm_feature_dim", [](C& c) -> int& {
      return c.sbm.feature_dim;
    }));
    f->push_back(RealField("sbm_feature_sigma", [](C& c) -> double& {
      return c.sbm.feature_sigma;
    }));
    f->push_back(RealField("sbm_mean_separation", [](C& c) -> double& {
      return c.sbm.mean_separation;
    }));
    return f;
  }();
  return *fields;
}

}  // namespace

void SetSeed(ExperimentConfig& config, std::uint64_t seed) {
  config.fed.seed = seed;
  config.partition.seed = seed;
  config.sbm.seed = seed;
}

void SetNumClients(ExperimentConfig& config, int num_clients) {
  config.fed.num_clients = num_clients;
  config.partition.num_clients = num_clients;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const Field& f : Fields()) keys.push_back(f.name);
  return keys;
}

absl::Status ApplyOverride(ExperimentConfig& config, absl::string_view key,
                           absl::string_view value) {
  for (const Field& f : Fields()) {
    if (f.name != key) continue;
    if (!f.set(config, absl::StripAsciiWhitespace(value))) {
      return absl::InvalidArgumentError(absl::StrCat(
          "key '", key, "': expected ", f.type, ", got '", value, "'"));
    }
    return absl::OkStatus();
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown key '", key,
                   "'; valid keys: ", absl::StrJoin(ConfigKeys(), ", ")));
}

absl::StatusOr<ExperimentConfig> ParseConfigText(absl::string_view text) {
  ExperimentConfig config;
  int line_no = 0;
  for (absl::string_view raw : absl::StrSplit(text, '\n')) {
    ++line_no;
    absl::string_view line = raw.substr(0, raw.find('#'));
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected key = value"));
    }
    const absl::string_view key =
        absl::StripAsciiWhitespace(line.substr(0, eq));
    const absl::string_view value =
        absl::StripAsciiWhitespace(line.substr(eq + 1));
    if (absl::Status s = ApplyOverride(config, key, value); !s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", s.message()));
    }
  }
  RETURN_IF_ERROR(ValidateConfig(config));
  return config;
}

absl::StatusOr<ExperimentConfig> ParseConfigFile(
    const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) {
    return absl::NotFoundError(
        absl::StrCat("cannot open config ", path.string()));
  }
  std::stringstream buffer;
  buffer << file.rdbuf();
  auto config = ParseConfigText(buffer.str());
  if (!config.ok()) {
    return absl::Status(config.status().code(),
                        absl::StrCat(path.string(), ": ",
                                     config.status().message()));
  }
  return config;
}

absl::Status ValidateConfig(const ExperimentConfig& config) {
  RETURN_IF_ERROR(ValidateFedConfig(config.fed));
  RETURN_IF_ERROR(ValidatePartitionSpec(config.partition));
  if (config.num_seeds < 1) {
    return absl::InvalidArgumentError("num_seeds must be >= 1");
  }
  if (config.dataset == DatasetKind::kFile &&
      (config.node_file.empty() || config.edge_file.empty())) {
    return absl::InvalidArgumentError(
        "dataset=file needs node_file and edge_file");
  }
  return absl::OkStatus();
}

std::string SerializeConfig(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : Fields()) {
    absl::StrAppend(&out, f.name, " = ", f.get(config), "\n");
  }
  return out;
}

}  // namespace fairgfl
