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

#ifndef FAIRGFL_CHECKPOINT_H_
#define FAIRGFL_CHECKPOINT_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fairgfl/gcn.h"
#include "fairgfl/ldp.h"

namespace fairgfl {

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
};

// Layout, all integers little-endian:
//   "FGCK" | u32 version (1) | u32 tensor count
//   per tensor: u32 name length | name bytes | u32 rows | u32 cols |
//               rows*cols float64 values in row-major order
absl::Status WriteCheckpoint(const std::filesystem::path& path,
                             std::span<const NamedTensor> tensors);
absl::StatusOr<std::vector<NamedTensor>> ReadCheckpoint(
    const std::filesystem::path& path);

std::vector<NamedTensor> ModelTensors(const GcnModel& model);
absl::StatusOr<GcnModel> ModelFromTensors(
    std::span<const NamedTensor> tensors);

std::vector<NamedTensor> EncoderTensors(const Encoder& encoder);
absl::StatusOr<Encoder> EncoderFromTensors(
    std::span<const NamedTensor> tensors);

}  // namespace fairgfl

#endif  // FAIRGFL_CHECKPOINT_H_
