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

#include "cpg/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "cpg/error.hpp"

namespace cpg {

const Tensor& Var::value() const { return tape_->value(index_); }

Var Tape::constant(Tensor value) {
  if (checked_) check_finite(value, "constant");
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(const std::string& name, const Tensor& value) {
  if (auto it = param_index_.find(&value); it != param_index_.end()) return Var(this, it->second);
  if (checked_) check_finite(value, "param " + name);
  Node node;
  node.external = &value;
  node.requires_grad = mode_ == Mode::kTrain;
  node.param_name = name;
  nodes_.push_back(std::move(node));
  param_index_.emplace(&value, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  if (checked_ && !value.all_finite()) fail(ErrorCategory::kNumeric, std::string(op) + ": non-finite output");
  Node node;
  node.value = std::move(value);
  if (mode_ == Mode::kTrain) {
    for (const Var& in : inputs) {
      if (&in.tape() != this) fail(ErrorCategory::kInvalidArgument, std::string(op) + ": operand from another tape");
      node.requires_grad = node.requires_grad || nodes_[in.index()].requires_grad;
    }
    if (node.requires_grad) node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(std::size_t i) {
  Node& n = nodes_[i];
  if (!n.has_grad) {
    n.grad = Tensor(value(i).shape());
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor* Tape::find_grad(std::size_t i) const noexcept {
  return nodes_[i].has_grad ? &nodes_[i].grad : nullptr;
}

void Tape::backward(Var loss) {
  if (mode_ != Mode::kTrain) fail(ErrorCategory::kInvalidArgument, "backward: tape recorded in inference mode");
  if (loss.value().size() != 1) {
    fail(ErrorCategory::kShape, "backward: loss must be scalar, got " + shape_string(loss.shape()));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  grad(loss.index())[0] = 1.0;
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.has_grad && n.backward) n.backward(*this, i);
  }
}

TensorMap Tape::parameter_gradients() const {
  TensorMap out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (!n.external) continue;
    out.emplace(n.param_name, n.has_grad ? n.grad : Tensor(n.external->shape()));
  }
  return out;
}

void Tape::accumulate_parameter_gradients(TensorMap& into) const {
  for (const Node& n : nodes_) {
    if (!n.external || !n.has_grad) continue;
    auto [it, inserted] = into.try_emplace(n.param_name, n.grad);
    if (inserted) continue;
    if (it->second.shape() != n.grad.shape()) {
      fail(ErrorCategory::kShape, "gradient for '" + n.param_name + "' changed shape");
    }
    for (std::size_t i = 0; i < n.grad.size(); ++i) it->second[i] += n.grad[i];
  }
}

namespace ops {
namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  fail(ErrorCategory::kShape, std::string(op) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) shape_error(op, a.shape(), b.shape());
}

void require_vector(const char* op, Var a) {
  if (a.value().rank() > 1) fail(ErrorCategory::kShape, std::string(op) + ": expected a vector, got " + shape_string(a.shape()));
}

void require_scalar(const char* op, Var s) {
  if (s.size() != 1) fail(ErrorCategory::kShape, std::string(op) + ": expected a scalar, got " + shape_string(s.shape()));
}

// Applies f elementwise and records dy/dx = df(x, y) for the backward rule.
template <typename F, typename DF>
Var unary(const char* op, Var a, F f, DF df) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.index();
  return a.tape().record(op, std::move(y), {a}, [ia, df](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    const Tensor& xv = t.value(ia);
    const Tensor& yv = t.value(self);
    Tensor& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(xv[i], yv[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 2 || (B.rank() != 1 && B.rank() != 2) || A.cols() != B.shape()[0]) {
    shape_error("matmul", A.shape(), B.shape());
  }
  const std::size_t m = A.rows(), k = A.cols();
  const std::size_t n = B.rank() == 2 ? B.cols() : 1;
  Tensor Y(B.rank() == 2 ? Shape{m, n} : Shape{m});
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = A.data().data() + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * B[p * n + j];
      Y[i * n + j] = acc;
    }
  }
  const std::size_t ia = a.index(), ib = b.index();
  return a.tape().record("matmul", std::move(Y), {a, b}, [ia, ib, m, k, n](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    if (t.requires_grad(ia)) {
      const Tensor& Bv = t.value(ib);
      Tensor& ga = t.grad(ia);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * Bv[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (t.requires_grad(ib)) {
      const Tensor& Av = t.value(ia);
      Tensor& gb = t.grad(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = Av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
        }
    }
  });
}

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
  const std::size_t ia = a.index(), ib = b.index();
  return a.tape().record("add", std::move(y), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    for (std::size_t in : {ia, ib}) {
      if (!t.requires_grad(in)) continue;
      Tensor& gi = t.grad(in);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b.value()[i];
  const std::size_t ia = a.index(), ib = b.index();
  return a.tape().record("sub", std::move(y), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
  const std::size_t ia = a.index(), ib = b.index();
  return a.tape().record("mul", std::move(y), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    if (t.requires_grad(ia)) {
      const Tensor& bv = t.value(ib);
      Tensor& ga = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(ib)) {
      const Tensor& av = t.value(ia);
      Tensor& gb = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  return unary("scale", a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var mul_scalar(Var a, Var s) {
  require_scalar("mul_scalar", s);
  const double sv = s.value()[0];
  Tensor y = a.value();
  for (double& v : y.data()) v *= sv;
  const std::size_t ia = a.index(), is = s.index();
  return a.tape().record("mul_scalar", std::move(y), {a, s}, [ia, is](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    if (t.requires_grad(ia)) {
      const double svv = t.value(is)[0];
      Tensor& ga = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * svv;
    }
    if (t.requires_grad(is)) {
      const Tensor& av = t.value(ia);
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * av[i];
      t.grad(is)[0] += acc;
    }
  });
}

Var div_scalar(Var a, Var s) {
  require_scalar("div_scalar", s);
  const double sv = s.value()[0];
  Tensor y = a.value();
  for (double& v : y.data()) v /= sv;
  const std::size_t ia = a.index(), is = s.index();
  return a.tape().record("div_scalar", std::move(y), {a, s}, [ia, is](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    const double svv = t.value(is)[0];
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / svv;
    }
    if (t.requires_grad(is)) {
      const Tensor& yv = t.value(self);
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * yv[i];
      t.grad(is)[0] -= acc / svv;
    }
  });
}

Var one_minus(Var a) {
  return unary("one_minus", a, [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; });
}

Var tanh(Var a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(
      "log", a, [](double x) { return std::log(std::max(x, kLogFloor)); },
      [](double x, double) { return x > kLogFloor ? 1.0 / x : 0.0; });
}

Var softmax(Var a, std::size_t axis) {
  const Tensor& x = a.value();
  if (x.rank() > 2 || axis >= std::max<std::size_t>(x.rank(), 1)) {
    fail(ErrorCategory::kShape, "softmax: axis " + std::to_string(axis) + " invalid for " + shape_string(x.shape()));
  }
  // Normalization groups: `groups` runs of `len` elements spaced by `stride`.
  std::size_t groups = 1, len = x.size(), stride = 1, step = 0;
  if (x.rank() == 2) {
    if (axis == 1) {
      groups = x.rows(), len = x.cols(), stride = 1, step = x.cols();
    } else {
      groups = x.cols(), len = x.rows(), stride = x.cols(), step = 1;
    }
  }
  Tensor y(x.shape());
  for (std::size_t gidx = 0; gidx < groups; ++gidx) {
    const std::size_t base = gidx * step;
    double mx = -INFINITY;
    for (std::size_t i = 0; i < len; ++i) mx = std::max(mx, x[base + i * stride]);
    double z = 0.0;
    for (std::size_t i = 0; i < len; ++i) z += (y[base + i * stride] = std::exp(x[base + i * stride] - mx));
    for (std::size_t i = 0; i < len; ++i) y[base + i * stride] /= z;
  }
  const std::size_t ia = a.index();
  return a.tape().record("softmax", std::move(y), {a}, [ia, groups, len, stride, step](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    const Tensor& yv = t.value(self);
    Tensor& ga = t.grad(ia);
    for (std::size_t gidx = 0; gidx < groups; ++gidx) {
      const std::size_t base = gidx * step;
      double inner = 0.0;
      for (std::size_t i = 0; i < len; ++i) inner += g[base + i * stride] * yv[base + i * stride];
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t p = base + i * stride;
        ga[p] += yv[p] * (g[p] - inner);
      }
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.index();
  return a.tape().record("sum", Tensor::scalar(s), {a}, [ia](Tape& t, std::size_t self) {
    const double g = (*t.find_grad(self))[0];
    for (double& v : t.grad(ia).data()) v += g;
  });
}

Var dot(Var a, Var b) {
  require_vector("dot", a);
  require_same_shape("dot", a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.value()[i] * b.value()[i];
  const std::size_t ia = a.index(), ib = b.index();
  return a.tape().record("dot", Tensor::scalar(s), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const double g = (*t.find_grad(self))[0];
    if (t.requires_grad(ia)) {
      const Tensor& bv = t.value(ib);
      Tensor& ga = t.grad(ia);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * bv[i];
    }
    if (t.requires_grad(ib)) {
      const Tensor& av = t.value(ia);
      Tensor& gb = t.grad(ib);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * av[i];
    }
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorCategory::kShape, "concat: no operands");
  std::vector<double> values;
  std::vector<std::size_t> indices, offsets;
  for (const Var& p : parts) {
    require_vector("concat", p);
    offsets.push_back(values.size());
    indices.push_back(p.index());
    const auto d = p.value().data();
    values.insert(values.end(), d.begin(), d.end());
  }
  return parts.front().tape().record(
      "concat", Tensor::vector(std::move(values)), parts,
      [indices = std::move(indices), offsets = std::move(offsets)](Tape& t, std::size_t self) {
        const Tensor& g = *t.find_grad(self);
        for (std::size_t k = 0; k < indices.size(); ++k) {
          if (!t.requires_grad(indices[k])) continue;
          Tensor& gk = t.grad(indices[k]);
          for (std::size_t i = 0; i < gk.size(); ++i) gk[i] += g[offsets[k] + i];
        }
      });
}

Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }

Var slice(Var a, std::size_t begin, std::size_t length) {
  require_vector("slice", a);
  if (begin + length > a.size()) {
    fail(ErrorCategory::kShape, "slice: range [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                                    ") exceeds " + shape_string(a.shape()));
  }
  const auto d = a.value().data();
  std::vector<double> values(d.begin() + begin, d.begin() + begin + length);
  const std::size_t ia = a.index();
  return a.tape().record("slice", Tensor::vector(std::move(values)), {a}, [ia, begin](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    Tensor& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[begin + i] += g[i];
  });
}

Var row(Var matrix, std::size_t r) {
  const Tensor& m = matrix.value();
  if (m.rank() != 2 || r >= m.rows()) {
    fail(ErrorCategory::kShape, "row: index " + std::to_string(r) + " invalid for " + shape_string(m.shape()));
  }
  const std::size_t cols = m.cols();
  const auto d = m.data();
  std::vector<double> values(d.begin() + r * cols, d.begin() + (r + 1) * cols);
  const std::size_t ia = matrix.index();
  return matrix.tape().record("row", Tensor::vector(std::move(values)), {matrix}, [ia, r, cols](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    Tensor& ga = t.grad(ia);
    for (std::size_t i = 0; i < cols; ++i) ga[r * cols + i] += g[i];
  });
}

Var pick(Var a, std::size_t i) {
  if (i >= a.size()) {
    fail(ErrorCategory::kShape, "pick: index " + std::to_string(i) + " invalid for " + shape_string(a.shape()));
  }
  const std::size_t ia = a.index();
  return a.tape().record("pick", Tensor::scalar(a.value()[i]), {a}, [ia, i](Tape& t, std::size_t self) {
    t.grad(ia)[i] += (*t.find_grad(self))[0];
  });
}

Var scatter_add(Var values, std::span<const std::size_t> indices, std::size_t size) {
  require_vector("scatter_add", values);
  if (indices.size() != values.size()) {
    fail(ErrorCategory::kShape, "scatter_add: " + std::to_string(indices.size()) + " indices for values " +
                                    shape_string(values.shape()));
  }
  Tensor y(Shape{size});
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= size) {
      fail(ErrorCategory::kShape, "scatter_add: index " + std::to_string(indices[j]) + " out of range " + std::to_string(size));
    }
    y[indices[j]] += values.value()[j];
  }
  const std::size_t ia = values.index();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return values.tape().record("scatter_add", std::move(y), {values}, [ia, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    Tensor& ga = t.grad(ia);
    for (std::size_t j = 0; j < idx.size(); ++j) ga[j] += g[idx[j]];
  });
}

Var pad(Var a, std::size_t size) {
  require_vector("pad", a);
  if (size < a.size()) {
    fail(ErrorCategory::kShape, "pad: target size " + std::to_string(size) + " smaller than " + shape_string(a.shape()));
  }
  std::vector<double> values(size, 0.0);
  std::copy(a.value().data().begin(), a.value().data().end(), values.begin());
  const std::size_t ia = a.index();
  return a.tape().record("pad", Tensor::vector(std::move(values)), {a}, [ia](Tape& t, std::size_t self) {
    const Tensor& g = *t.find_grad(self);
    Tensor& ga = t.grad(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
  });
}

}  // namespace ops
}  // namespace cpg
