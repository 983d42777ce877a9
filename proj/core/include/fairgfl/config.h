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

#ifndef FAIRGFL_CONFIG_H_
#define FAIRGFL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "fairgfl/federation.h"
#include "fairgfl/graph.h"

namespace fairgfl {

enum class DatasetKind { kSbm, kFile };

struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::kSbm;
  SbmSpec sbm;
  std::string node_file;
  std::string edge_file;
  PartitionSpec partition;
  FedConfig fed;
  // Multi-seed suites use seeds seed, seed + 1, ..., seed + num_seeds - 1.
  int num_seeds = 1;
};

// Sets the one experiment seed that drives graph generation, partitioning
// and federation.
void SetSeed(ExperimentConfig& config, std::uint64_t seed);
// Sets P for both the partitioner and the federation.
void SetNumClients(ExperimentConfig& config, int num_clients);

// Names of all accepted keys in serialization order.
std::vector<std::string> ConfigKeys();

// Sets one key from its text form. Unknown keys and malformed values give
// InvalidArgument naming the key (and the expected type).
absl::Status ApplyOverride(ExperimentConfig& config, absl::string_view key,
                           absl::string_view value);

// Flat `key = value` text; '#' starts a comment; blank lines are ignored.
// Missing keys keep their defaults. The result is validated.
absl::StatusOr<ExperimentConfig> ParseConfigText(absl::string_view text);
absl::StatusOr<ExperimentConfig> ParseConfigFile(
    const std::filesystem::path& path);

absl::Status ValidateConfig(const ExperimentConfig& config);

// Every key with its resolved value, one `key = value` per line, in a form
// ParseConfigText reads back to an identical config.
std::string SerializeConfig(const ExperimentConfig& config);

}  // namespace fairgfl

#endif  // FAIRGFL_CONFIG_H_
