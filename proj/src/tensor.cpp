// Copyright 2026 The cpg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cpg/tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <system_error>

#include "cpg/error.hpp"

namespace cpg {

const char* category_name(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::kInvalidArgument: return "invalid_argument";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kMismatch: return "mismatch";
    case ErrorCategory::kNumeric: return "numeric";
    case ErrorCategory::kShape: return "shape";
    case ErrorCategory::kInternal: return "internal";
  }
  return "internal";
}

std::size_t shape_size(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    fail(ErrorCategory::kShape, "tensor: shape " + shape_string(shape_) + " holds " +
                                    std::to_string(shape_size(shape_)) + " values, got " +
                                    std::to_string(data_.size()));
  }
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor(Shape{rows, cols}, std::move(values));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    fail(ErrorCategory::kShape, "item: expected a single-element tensor, got " + shape_string(shape_));
  }
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

void check_finite(const Tensor& tensor, const std::string& what) {
  if (!tensor.all_finite()) fail(ErrorCategory::kNumeric, what + ": non-finite value");
}

Tensor& ParameterStore::add(const std::string& name, Shape shape) {
  auto [it, inserted] = tensors_.try_emplace(name, Tensor(std::move(shape)));
  if (!inserted) fail(ErrorCategory::kInvalidArgument, "parameter '" + name + "' already exists");
  return it->second;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) fail(ErrorCategory::kInvalidArgument, "unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) fail(ErrorCategory::kInvalidArgument, "unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParameterStore::total_size() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, t] : tensors_) n += t.size();
  return n;
}

void write_tensor_map(std::ostream& out, const TensorMap& tensors) {
  out << kParameterMapHeader << '\n' << tensors.size() << '\n';
  char buf[64];
  for (const auto& [name, t] : tensors) {
    out << name << ' ' << t.rank();
    for (std::size_t d : t.shape()) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
      auto res = std::to_chars(buf, buf + sizeof(buf), t[i]);
      if (i) out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

TensorMap read_tensor_map(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kParameterMapHeader) {
    fail(ErrorCategory::kParse, "parameter map: expected header '" + std::string(kParameterMapHeader) + "'");
  }
  std::size_t count = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> count)) {
    fail(ErrorCategory::kParse, "parameter map: missing entry count");
  }
  TensorMap out;
  for (std::size_t e = 0; e < count; ++e) {
    if (!std::getline(in, line)) fail(ErrorCategory::kParse, "parameter map: truncated");
    std::istringstream head(line);
    std::string name;
    std::size_t rank = 0;
    if (!(head >> name >> rank)) fail(ErrorCategory::kParse, "parameter map: bad entry header '" + line + "'");
    Shape shape(rank);
    for (auto& d : shape) {
      if (!(head >> d)) fail(ErrorCategory::kParse, "parameter map: bad shape for '" + name + "'");
    }
    if (!std::getline(in, line)) fail(ErrorCategory::kParse, "parameter map: missing values for '" + name + "'");
    std::vector<double> values;
    values.reserve(shape_size(shape));
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) fail(ErrorCategory::kParse, "parameter map: bad value in '" + name + "'");
      values.push_back(v);
      p = res.ptr;
    }
    if (values.size() != shape_size(shape)) {
      fail(ErrorCategory::kParse, "parameter map: '" + name + "' expects " + std::to_string(shape_size(shape)) +
                                      " values, found " + std::to_string(values.size()));
    }
    out.emplace(name, Tensor(std::move(shape), std::move(values)));
  }
  return out;
}

}  // namespace cpg
