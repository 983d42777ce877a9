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

#ifndef FAIRGFL_METRICS_H_
#define FAIRGFL_METRICS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fairgfl/gcn.h"

namespace fairgfl {

struct RoundRecord {
  int round = 0;
  std::string algorithm;
  double test_loss = 0.0;
  double test_acc = 0.0;
  double loss_var = 0.0;
  double loss_entropy = 0.0;
  // Set when every client loss is zero and entropy falls back to ln P.
  bool entropy_degenerate = false;
  std::vector<double> client_losses;  // one per client, global model
  // Not serialized, so that CSV output is reproducible bitwise.
  double wall_time_ms = 0.0;

  double MeanClientLoss() const;
};

// Population variance (1/P) sum (F_i - mean)^2.
absl::StatusOr<double> LossVariance(std::span<const double> losses);

struct EntropyResult {
  double value = 0.0;
  bool degenerate = false;
};

// Shannon entropy (natural log) of losses normalized by their sum.
absl::StatusOr<EntropyResult> LossEntropy(std::span<const double> losses);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Masked cross-entropy and top-1 accuracy (ties go to the lowest class).
absl::StatusOr<Evaluation> EvaluateGlobal(const GcnModel& model,
                                          const NormalizedAdjacency& adjacency,
                                          const Eigen::MatrixXd& features,
                                          std::span<const int> labels,
                                          std::span<const int> mask);

// Fills loss_var, loss_entropy and entropy_degenerate from client_losses.
absl::Status FillFairnessMetrics(RoundRecord& record);

// Header: round,algorithm,test_loss,test_acc,loss_var,loss_entropy,
//         client_0,...,client_{P-1}
// Reals are printed with 17 significant digits so values round-trip.
std::string RoundsCsvHeader(int num_clients);
std::string RoundCsvRow(const RoundRecord& record);
absl::Status WriteRoundsCsv(const std::filesystem::path& path,
                            std::span<const RoundRecord> records,
                            int num_clients);
absl::StatusOr<std::vector<RoundRecord>> ReadRoundsCsv(
    const std::filesystem::path& path);

}  // namespace fairgfl

#endif  // FAIRGFL_METRICS_H_
