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

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cpg {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

/// Dense row-major tensor of doubles. A rank-0 tensor is a scalar.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Valid for rank-2 tensors only.
  std::size_t rows() const noexcept { return shape_[0]; }
  std::size_t cols() const noexcept { return shape_[1]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double at(std::size_t r, std::size_t c) const noexcept { return data_[r * shape_[1] + c]; }
  double& at(std::size_t r, std::size_t c) noexcept { return data_[r * shape_[1] + c]; }

  // Scalar value of a single-element tensor.
  double item() const;

  bool all_finite() const noexcept;
  void fill(double value) noexcept;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Throws kNumeric naming `what` when any element is NaN or infinite.
void check_finite(const Tensor& tensor, const std::string& what);

/// Named trainable tensors. Iteration order is by name, which keeps every
/// reduction over parameters deterministic.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Shape shape);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.contains(name); }

  std::size_t count() const noexcept { return tensors_.size(); }
  std::size_t total_size() const noexcept;

  std::map<std::string, Tensor>& tensors() noexcept { return tensors_; }
  const std::map<std::string, Tensor>& tensors() const noexcept { return tensors_; }

 private:
  std::map<std::string, Tensor> tensors_;
};

using TensorMap = std::map<std::string, Tensor>;

// Parameter map serialization. The block starts with a versioned header
// line, then the entry count, then one "name rank d0 d1 ..." line followed by
// one line of shortest round-trip values per entry.
inline constexpr const char* kParameterMapHeader = "CPG-PARAMS v1";

void write_tensor_map(std::ostream& out, const TensorMap& tensors);
TensorMap read_tensor_map(std::istream& in);

}  // namespace cpg
