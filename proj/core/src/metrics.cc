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

#include "fairgfl/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"

namespace fairgfl {

double RoundRecord::MeanClientLoss() const {
  if (client_losses.empty()) return 0.0;
  return std::accumulate(client_losses.begin(), client_losses.end(), 0.0) /
         static_cast<double>(client_losses.size());
}

absl::StatusOr<double> LossVariance(std::span<const double> losses) {
  if (losses.empty()) return absl::InvalidArgumentError("no losses");
  const double n = static_cast<double>(losses.size());
  const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
  double total = 0.0;
  for (double f : losses) total += (f - mean) * (f - mean);
  return total / n;
}

absl::StatusOr<EntropyResult> LossEntropy(std::span<const double> losses) {
  if (losses.empty()) return absl::InvalidArgumentError("no losses");
  double sum = 0.0;
  for (double f : losses) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      return absl::InvalidArgumentError("losses must be finite and >= 0");
    }
    sum += f;
  }
  if (sum == 0.0) {
    return EntropyResult{std::log(static_cast<double>(losses.size())), true};
  }
  double h = 0.0;
  for (double f : losses) {
    if (f > 0.0) {
      const double share = f / sum;
      h -= share * std::log(share);
    }
  }
  return EntropyResult{h, false};
}

absl::StatusOr<Evaluation> EvaluateGlobal(const GcnModel& model,
                                          const NormalizedAdjacency& adjacency,
                                          const Eigen::MatrixXd& features,
                                          std::span<const int> labels,
                                          std::span<const int> mask) {
  if (mask.empty()) return absl::InvalidArgumentError("empty test mask");
  auto loss = MaskedLoss(model, adjacency, features, labels, mask);
  if (!loss.ok()) return loss.status();
  auto cache = Forward(model, adjacency, features);
  if (!cache.ok()) return cache.status();
  int correct = 0;
  for (int v : mask) {
    Eigen::Index best = 0;
    cache->logits.row(v).maxCoeff(&best);
    if (best == labels[v]) ++correct;
  }
  return Evaluation{*loss, static_cast<double>(correct) / mask.size()};
}

absl::Status FillFairnessMetrics(RoundRecord& record) {
  auto var = LossVariance(record.client_losses);
  if (!var.ok()) return var.status();
  auto ent = LossEntropy(record.client_losses);
  if (!ent.ok()) return ent.status();
  record.loss_var = *var;
  record.loss_entropy = ent->value;
  record.entropy_degenerate = ent->degenerate;
  return absl::OkStatus();
}

std::string RoundsCsvHeader(int num_clients) {
  std::string out = "round,algorithm,test_loss,test_acc,loss_var,loss_entropy";
  for (int i = 0; i < num_clients; ++i) absl::StrAppend(&out, ",client_", i);
  return out;
}

std::string RoundCsvRow(const RoundRecord& r) {
  std::string out =
      absl::StrFormat("%d,%s,%.17g,%.17g,%.17g,%.17g", r.round, r.algorithm,
                      r.test_loss, r.test_acc, r.loss_var, r.loss_entropy);
  for (double f : r.client_losses) absl::StrAppendFormat(&out, ",%.17g", f);
  return out;
}

absl::Status WriteRoundsCsv(const std::filesystem::path& path,
                            std::span<const RoundRecord> records,
                            int num_clients) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) {
    return absl::UnavailableError(
        absl::StrCat("cannot open ", path.string(), " for writing"));
  }
  file << RoundsCsvHeader(num_clients) << '\n';
  for (const RoundRecord& r : records) {
    if (static_cast<int>(r.client_losses.size()) != num_clients) {
      return absl::InvalidArgumentError("client loss count mismatch");
    }
    file << RoundCsvRow(r) << '\n';
  }
  if (!file) return absl::DataLossError("write failed");
  return absl::OkStatus();
}

absl::StatusOr<std::vector<RoundRecord>> ReadRoundsCsv(
    const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  std::string line;
  if (!std::getline(file, line)) {
    return absl::InvalidArgumentError("missing CSV header");
  }
  const std::vector<std::string> header = absl::StrSplit(line, ',');
  if (header.size() < 6 || header[0] != "round") {
    return absl::InvalidArgumentError("unexpected CSV header");
  }
  const size_t num_clients = header.size() - 6;
  std::vector<RoundRecord> records;
  int line_no = 1;
  auto bad = [&](absl::string_view what) {
    return absl::InvalidArgumentError(absl::StrCat(
        "parse error in ", path.string(), " at line ", line_no, ": ", what));
  };
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = absl::StrSplit(line, ',');
    if (cells.size() != header.size()) return bad("wrong column count");
    RoundRecord r;
    if (!absl::SimpleAtoi(cells[0], &r.round)) return bad("round");
    r.algorithm = cells[1];
    double* reals[] = {&r.test_loss, &r.test_acc, &r.loss_var,
                       &r.loss_entropy};
    for (int c = 0; c < 4; ++c) {
      if (!absl::SimpleAtod(cells[2 + c], reals[c])) return bad(header[2 + c]);
    }
    r.client_losses.resize(num_clients);
    for (size_t c = 0; c < num_clients; ++c) {
      if (!absl::SimpleAtod(cells[6 + c], &r.client_losses[c])) {
        return bad(header[6 + c]);
      }
    }
    r.entropy_degenerate =
        num_clients > 0 &&
        std::all_of(r.client_losses.begin(), r.client_losses.end(),
                    [](double f) { return f == 0.0; });
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace fairgfl
