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

#include "fairgfl/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fairgfl {
namespace {

constexpr char kMagic[4] = {'F', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void PutF64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits >> (8 * i)));
  }
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  bool U32(std::uint32_t& v) {
    if (pos_ + 4 > data_.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return true;
  }
  bool F64(double& v) {
    if (pos_ + 8 > data_.size()) return false;
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(data_[pos_ + i]))
              << (8 * i);
    }
    pos_ += 8;
    v = std::bit_cast<double>(bits);
    return true;
  }
  bool Bytes(size_t n, std::string& out) {
    if (pos_ + n > data_.size()) return false;
    out = data_.substr(pos_, n);
    pos_ += n;
    return true;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  size_t pos_ = 0;
};

const NamedTensor* Find(std::span<const NamedTensor> tensors,
                        absl::string_view name) {
  for (const NamedTensor& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

}  // namespace

absl::Status WriteCheckpoint(const std::filesystem::path& path,
                             std::span<const NamedTensor> tensors) {
  std::string out(kMagic, 4);
  PutU32(out, kVersion);
  PutU32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    PutU32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    PutU32(out, static_cast<std::uint32_t>(t.value.rows()));
    PutU32(out, static_cast<std::uint32_t>(t.value.cols()));
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) {
        PutF64(out, t.value(r, c));
      }
    }
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    return absl::UnavailableError(
        absl::StrCat("cannot open ", path.string(), " for writing"));
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    return absl::DataLossError(absl::StrCat("write failed: ", path.string()));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<NamedTensor>> ReadCheckpoint(
    const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  std::string data((std::istreambuf_iterator<char>(file)),
                   std::istreambuf_iterator<char>());
  Reader reader(std::move(data));
  auto corrupt = [&path](absl::string_view what) {
    return absl::DataLossError(
        absl::StrCat("corrupt checkpoint ", path.string(), ": ", what));
  };
  std::string magic;
  if (!reader.Bytes(4, magic) || magic != std::string(kMagic, 4)) {
    return corrupt("bad magic");
  }
  std::uint32_t version = 0, count = 0;
  if (!reader.U32(version) || version != kVersion) {
    return corrupt("unsupported version");
  }
  if (!reader.U32(count)) return corrupt("truncated header");
  std::vector<NamedTensor> tensors;
  for (std::uint32_t t = 0; t < count; ++t) {
    std::uint32_t name_len = 0, rows = 0, cols = 0;
    NamedTensor tensor;
    if (!reader.U32(name_len) || !reader.Bytes(name_len, tensor.name) ||
        !reader.U32(rows) || !reader.U32(cols)) {
      return corrupt("truncated tensor header");
    }
    tensor.value.resize(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) {
        if (!reader.F64(tensor.value(r, c))) return corrupt("truncated data");
      }
    }
    tensors.push_back(std::move(tensor));
  }
  if (!reader.done()) return corrupt("trailing bytes");
  return tensors;
}

std::vector<NamedTensor> ModelTensors(const GcnModel& model) {
  return {{"w1", model.w1}, {"w2", model.w2}};
}

absl::StatusOr<GcnModel> ModelFromTensors(
    std::span<const NamedTensor> tensors) {
  const NamedTensor* w1 = Find(tensors, "w1");
  const NamedTensor* w2 = Find(tensors, "w2");
  if (w1 == nullptr || w2 == nullptr) {
    return absl::InvalidArgumentError("checkpoint lacks w1/w2");
  }
  if (w1->value.cols() != w2->value.rows()) {
    return absl::InvalidArgumentError("w1/w2 shapes disagree");
  }
  return GcnModel{w1->value, w2->value};
}

std::vector<NamedTensor> EncoderTensors(const Encoder& encoder) {
  Eigen::MatrixXd range(1, 2);
  range << encoder.x_min, encoder.x_max;
  return {{"input_mean", encoder.input_mean},
          {"input_scale", encoder.input_scale},
          {"weight", encoder.weight},
          {"bias", encoder.bias},
          {"range", range}};
}

absl::StatusOr<Encoder> EncoderFromTensors(
    std::span<const NamedTensor> tensors) {
  const NamedTensor* mean = Find(tensors, "input_mean");
  const NamedTensor* scale = Find(tensors, "input_scale");
  const NamedTensor* weight = Find(tensors, "weight");
  const NamedTensor* bias = Find(tensors, "bias");
  const NamedTensor* range = Find(tensors, "range");
  if (!mean || !scale || !weight || !bias || !range) {
    return absl::InvalidArgumentError("checkpoint lacks encoder tensors");
  }
  const Eigen::Index f = weight->value.rows();
  const Eigen::Index d = weight->value.cols();
  if (mean->value.rows() != 1 || mean->value.cols() != f ||
      scale->value.rows() != 1 || scale->value.cols() != f ||
      bias->value.rows() != 1 || bias->value.cols() != d ||
      range->value.rows() != 1 || range->value.cols() != 2) {
    return absl::InvalidArgumentError("encoder tensor shapes disagree");
  }
  Encoder e;
  e.input_mean = mean->value.row(0);
  e.input_scale = scale->value.row(0);
  e.weight = weight->value;
  e.bias = bias->value.row(0);
  e.x_min = range->value(0, 0);
  e.x_max = range->value(0, 1);
  return e;
}

}  // namespace fairgfl
