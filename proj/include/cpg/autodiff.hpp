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

// Reverse-mode differentiation over Tensor values.
//
// A Tape records every primitive in evaluation order. Each recorded node keeps
// its forward value and, when any input needs a gradient, a closure that pushes
// the node's output gradient into its inputs. Tape::backward replays those
// closures from the loss back to the first node, once each.
//
// A Tape is single-threaded. Parameters are bound by reference, so the bound
// tensors must stay alive and unmodified until the tape is discarded.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpg/tensor.hpp"

namespace cpg {

class Tape;

/// Handle to a node on a Tape.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const noexcept { return *tape_; }
  std::size_t index() const noexcept { return index_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  double item() const { return value().item(); }
  double operator[](std::size_t i) const { return value()[i]; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  enum class Mode {
    kTrain,      // record backward rules
    kInference,  // values only; backward() is an error
  };

  explicit Tape(Mode mode = Mode::kTrain) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Mode mode() const noexcept { return mode_; }

  // Checked mode: every recorded value is verified finite.
  void set_checked(bool checked) noexcept { checked_ = checked; }

  Var constant(Tensor value);

  // Binds a trainable tensor. Binding the same tensor twice returns the same
  // leaf, so gradients from every use accumulate in one place.
  Var param(const std::string& name, const Tensor& value);

  // Records an op result. `backward` is dropped when no input needs a gradient.
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn backward);

  // Propagates d(loss)/d(node) to every node. Gradients from a previous call
  // are discarded first, so replays are reproducible.
  void backward(Var loss);

  const Tensor& value(std::size_t i) const noexcept {
    const Node& n = nodes_[i];
    return n.external ? *n.external : n.value;
  }
  bool requires_grad(std::size_t i) const noexcept { return nodes_[i].requires_grad; }

  // Gradient accumulator for node i, allocated as zeros on first use.
  Tensor& grad(std::size_t i);
  // Gradient for node i or nullptr when nothing reached it.
  const Tensor* find_grad(std::size_t i) const noexcept;
  const Tensor* find_grad(Var v) const noexcept { return find_grad(v.index()); }

  // Gradients of every bound parameter by name; unreached ones are zero.
  TensorMap parameter_gradients() const;
  // Adds every bound parameter's gradient into `into[name]`.
  void accumulate_parameter_gradients(TensorMap& into) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
    std::string param_name;
  };

  Mode mode_;
  bool checked_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> param_index_;
};

/// Primitive differentiable operations.
///
/// Shapes follow linear-algebra rules with no broadcasting: operands of
/// elementwise ops must match exactly. Vectors are rank-1, scalars rank-0.
/// Violations throw a kShape error naming the op and both shapes.
namespace ops {

// [m,k] x [k,n] -> [m,n]; [m,k] x [k] -> [m].
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
// Vector times a single-element Var.
Var mul_scalar(Var a, Var s);
Var div_scalar(Var a, Var s);
Var one_minus(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
// Natural log with inputs clamped at kLogFloor; the clamped region has zero slope.
Var log(Var a);
// Softmax of a vector, or of a matrix along `axis` (0 = down columns, 1 = along rows).
Var softmax(Var a, std::size_t axis = 0);
Var sum(Var a);
Var dot(Var a, Var b);
// Concatenates vectors and scalars into one vector.
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
Var slice(Var a, std::size_t begin, std::size_t length);
Var row(Var matrix, std::size_t r);
Var pick(Var a, std::size_t i);
// out[indices[j]] += values[j], out has `size` entries.
Var scatter_add(Var values, std::span<const std::size_t> indices, std::size_t size);
// Vector extended with trailing zeros up to `size`.
Var pad(Var a, std::size_t size);

inline constexpr double kLogFloor = 1e-10;

}  // namespace ops
}  // namespace cpg
