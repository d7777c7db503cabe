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


#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cpg/autodiff.hpp"
#include "cpg/error.hpp"
#include "cpg/gradient_check.hpp"
#include "cpg/random.hpp"
#include "cpg/tensor.hpp"
#include "support.hpp"

using namespace cpg;
using cpg::testing::category_of;
using cpg::testing::message_of;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = uniform(rng, lo, hi);
  return t;
}

// Gradient check of a loss built from named parameters.
double check(const ParameterStore& ps, const std::function<Var(Tape&, std::function<Var(const char*)>)>& body) {
  return gradient_check(
             [&](Tape& t, const ParameterStore& p) {
               return body(t, [&](const char* name) { return t.param(name, p.get(name)); });
             },
             ps)
      .max_relative_error;
}

}  // namespace

TEST_CASE("tensor shape and size agree") {
  Tensor t(Shape{2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(Tensor::scalar(4.0).rank() == 0);
  CHECK(Tensor::scalar(4.0).item() == 4.0);
  CHECK_THROWS_AS(Tensor(Shape{2, 2}, {1.0, 2.0, 3.0}), Error);
}

TEST_CASE("checked mode rejects non-finite values") {
  Tensor bad = Tensor::vector({1.0, NAN});
  CHECK_FALSE(bad.all_finite());
  CHECK(category_of([&] { check_finite(bad, "x"); }) == ErrorCategory::kNumeric);
  Tape tape;
  tape.set_checked(true);
  CHECK(category_of([&] { tape.constant(bad); }) == ErrorCategory::kNumeric);
  Var big = tape.constant(Tensor::vector({1000.0}));
  CHECK(category_of([&] { ops::exp(big); }) == ErrorCategory::kNumeric);
}

TEST_CASE("softmax of equal logits is uniform") {
  Tape tape;
  Var s = ops::softmax(tape.constant(Tensor::vector({0.0, 0.0, 0.0})));
  for (std::size_t i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("sigmoid of zero is one half") {
  Tape tape;
  CHECK(ops::sigmoid(tape.constant(Tensor::vector({0.0})))[0] == 0.5);
}

TEST_CASE("matmul matches hand arithmetic") {
  Tape tape;
  Var a = tape.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  Var b = tape.constant(Tensor::matrix(3, 1, {7, 8, 9}));
  Var y = ops::matmul(a, b);
  CHECK(y.shape() == Shape{2, 1});
  CHECK(y[0] == 1 * 7 + 2 * 8 + 3 * 9);
  CHECK(y[1] == 4 * 7 + 5 * 8 + 6 * 9);
}

TEST_CASE("shape errors name the op and both shapes") {
  Tape tape;
  Var a = tape.constant(Tensor(Shape{2, 3}));
  Var b = tape.constant(Tensor(Shape{2, 3}));
  try {
    ops::matmul(a, b);
    FAIL("expected a shape error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kShape);
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    const auto first = msg.find("[2x3]");
    REQUIRE(first != std::string::npos);
    CHECK(msg.find("[2x3]", first + 1) != std::string::npos);
  }
  Var v = tape.constant(Tensor(Shape{3}));
  Var w = tape.constant(Tensor(Shape{4}));
  CHECK(category_of([&] { ops::add(v, w); }) == ErrorCategory::kShape);
  CHECK(category_of([&] { ops::mul(v, w); }) == ErrorCategory::kShape);
  CHECK(category_of([&] { ops::dot(v, w); }) == ErrorCategory::kShape);
}

TEST_CASE("gradient of sum is all ones") {
  ParameterStore ps;
  ps.add("w", {2, 3}).fill(0.7);
  Tape tape;
  Var w = tape.param("w", ps.get("w"));
  tape.backward(ops::sum(w));
  const TensorMap g = tape.parameter_gradients();
  for (double v : g.at("w").data()) CHECK(v == 1.0);
}

TEST_CASE("gradient of half the squared norm is the vector itself") {
  std::mt19937_64 rng(1);
  ParameterStore ps;
  ps.add("w", {5}) = random_tensor({5}, rng);
  Tape tape;
  Var w = tape.param("w", ps.get("w"));
  tape.backward(ops::scale(ops::sum(ops::mul(w, w)), 0.5));
  CHECK(tape.parameter_gradients().at("w") == ps.get("w"));
}

TEST_CASE("backward needs a scalar loss and a training tape") {
  Tape tape;
  Var v = tape.constant(Tensor::vector({1.0, 2.0}));
  CHECK(category_of([&] { tape.backward(v); }) == ErrorCategory::kShape);
  Tape inference(Tape::Mode::kInference);
  Var s = inference.constant(Tensor::scalar(1.0));
  CHECK(category_of([&] { inference.backward(s); }) == ErrorCategory::kInvalidArgument);
}

TEST_CASE("unreached parameters get zero gradients") {
  ParameterStore ps;
  ps.add("used", {3}).fill(1.0);
  ps.add("idle", {2, 2}).fill(1.0);
  Tape tape;
  Var used = tape.param("used", ps.get("used"));
  tape.param("idle", ps.get("idle"));
  tape.backward(ops::sum(used));
  const TensorMap g = tape.parameter_gradients();
  CHECK(g.at("idle") == Tensor(Shape{2, 2}));
}

TEST_CASE("log clamps at the floor") {
  Tape tape;
  ParameterStore ps;
  ps.add("p", {2}) = Tensor::vector({0.0, 0.5});
  Var p = tape.param("p", ps.get("p"));
  Var l = ops::log(p);
  CHECK(l[0] == std::log(ops::kLogFloor));
  tape.backward(ops::sum(l));
  const Tensor g = tape.parameter_gradients().at("p");
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(2.0));
}

TEST_CASE("quadratic loss passes the gradient check tightly") {
  std::mt19937_64 rng(3);
  ParameterStore ps;
  ps.add("w", {4}) = random_tensor({4}, rng);
  const double err = check(ps, [](Tape&, auto p) {
    Var w = p("w");
    return ops::sum(ops::mul(w, w));
  });
  CHECK(err < 1e-7);
}

TEST_CASE("LSTM cell step matches finite differences") {
  std::mt19937_64 rng(5);
  const std::size_t H = 3, X = 2;
  ParameterStore ps;
  ps.add("W", {4 * H, X}) = random_tensor({4 * H, X}, rng);
  ps.add("U", {4 * H, H}) = random_tensor({4 * H, H}, rng);
  ps.add("b", {4 * H}) = random_tensor({4 * H}, rng);
  ps.add("x", {X}) = random_tensor({X}, rng);
  ps.add("h", {H}) = random_tensor({H}, rng);
  ps.add("c", {H}) = random_tensor({H}, rng);
  const double err = check(ps, [H](Tape&, auto p) {
    Var gates = ops::add(ops::add(ops::matmul(p("W"), p("x")), ops::matmul(p("U"), p("h"))), p("b"));
    Var i = ops::sigmoid(ops::slice(gates, 0, H));
    Var f = ops::sigmoid(ops::slice(gates, H, H));
    Var o = ops::sigmoid(ops::slice(gates, 2 * H, H));
    Var g = ops::tanh(ops::slice(gates, 3 * H, H));
    Var c = ops::add(ops::mul(f, p("c")), ops::mul(i, g));
    Var h = ops::mul(o, ops::tanh(c));
    return ops::sum(ops::mul(h, ops::exp(c)));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("every primitive matches finite differences on random shapes") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(uniform01(rng) * 8);
    const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 8);
    const std::size_t k = 1 + static_cast<std::size_t>(uniform01(rng) * 8);
    ParameterStore ps;
    ps.add("A", {m, k}) = random_tensor({m, k}, rng);
    ps.add("B", {k, n}) = random_tensor({k, n}, rng);
    ps.add("u", {m}) = random_tensor({m}, rng);
    ps.add("v", {m}) = random_tensor({m}, rng);
    ps.add("pos", {m}) = random_tensor({m}, rng, 0.2, 2.0);
    ps.add("s", {}) = Tensor::scalar(uniform(rng, 0.5, 1.5));
    ps.add("x", {k}) = random_tensor({k}, rng);
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(k);
    // Each loss routes through one primitive; weights break symmetry.
    const Tensor weights_mn = random_tensor({m * n}, rng);
    auto wsum = [&](Tape& t, Var y) {
      Tensor w(Shape{y.size()});
      for (std::size_t i = 0; i < y.size(); ++i) w[i] = weights_mn[i % weights_mn.size()] + 0.1 * static_cast<double>(i);
      Tensor yw(y.shape(), std::vector<double>(w.data().begin(), w.data().end()));
      return ops::sum(ops::mul(y, t.constant(yw)));
    };
    const std::vector<std::pair<const char*, std::function<Var(Tape&, std::function<Var(const char*)>)>>> cases = {
        {"matmul", [&](Tape& t, auto p) { return wsum(t, ops::matmul(p("A"), p("B"))); }},
        {"matvec", [&](Tape& t, auto p) { return wsum(t, ops::matmul(p("A"), p("x"))); }},
        {"add", [&](Tape& t, auto p) { return wsum(t, ops::add(p("u"), p("v"))); }},
        {"sub", [&](Tape& t, auto p) { return wsum(t, ops::sub(p("u"), p("v"))); }},
        {"mul", [&](Tape& t, auto p) { return wsum(t, ops::mul(p("u"), p("v"))); }},
        {"scale", [&](Tape& t, auto p) { return wsum(t, ops::scale(p("u"), -1.7)); }},
        {"mul_scalar", [&](Tape& t, auto p) { return wsum(t, ops::mul_scalar(p("u"), p("s"))); }},
        {"div_scalar", [&](Tape& t, auto p) { return wsum(t, ops::div_scalar(p("u"), p("s"))); }},
        {"one_minus", [&](Tape& t, auto p) { return wsum(t, ops::one_minus(p("u"))); }},
        {"tanh", [&](Tape& t, auto p) { return wsum(t, ops::tanh(p("u"))); }},
        {"sigmoid", [&](Tape& t, auto p) { return wsum(t, ops::sigmoid(p("u"))); }},
        {"exp", [&](Tape& t, auto p) { return wsum(t, ops::exp(p("u"))); }},
        {"log", [&](Tape& t, auto p) { return wsum(t, ops::log(p("pos"))); }},
        {"softmax", [&](Tape& t, auto p) { return wsum(t, ops::softmax(p("u"))); }},
        {"softmax rows", [&](Tape& t, auto p) { return wsum(t, ops::softmax(p("A"), 1)); }},
        {"softmax cols", [&](Tape& t, auto p) { return wsum(t, ops::softmax(p("A"), 0)); }},
        {"sum", [&](Tape&, auto p) { return ops::sum(ops::mul(p("u"), p("u"))); }},
        {"dot", [&](Tape&, auto p) { return ops::dot(p("u"), p("v")); }},
        {"concat", [&](Tape& t, auto p) { return wsum(t, ops::concat({p("u"), p("s"), p("x")})); }},
        {"slice", [&](Tape& t, auto p) { return wsum(t, ops::slice(p("u"), m / 2, m - m / 2)); }},
        {"row", [&](Tape& t, auto p) { return wsum(t, ops::row(p("A"), m - 1)); }},
        {"pick", [&](Tape&, auto p) { return ops::mul(ops::pick(p("u"), 0), ops::pick(p("v"), m - 1)); }},
        {"scatter_add",
         [&](Tape& t, auto p) {
           std::vector<std::size_t> idx(m);
           for (std::size_t i = 0; i < m; ++i) idx[i] = (i * 3) % (m + 2);
           return wsum(t, ops::scatter_add(p("u"), idx, m + 2));
         }},
        {"pad", [&](Tape& t, auto p) { return wsum(t, ops::pad(p("u"), m + 3)); }},
    };
    for (const auto& [name, body] : cases) {
      CAPTURE(name);
      CHECK(check(ps, body) < 1e-4);
    }
  }
}

TEST_CASE("softmax rows are distributions") {
  std::mt19937_64 rng(11);
  Tape tape;
  Var a = tape.constant(random_tensor({5, 7}, rng, -20, 20));
  const Tensor rows = ops::softmax(a, 1).value();
  for (std::size_t r = 0; r < 5; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 7; ++c) {
      CHECK(rows.at(r, c) >= 0.0);
      s += rows.at(r, c);
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  const Tensor cols = ops::softmax(a, 0).value();
  for (std::size_t c = 0; c < 7; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < 5; ++r) s += cols.at(r, c);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("backward replays are bitwise identical") {
  std::mt19937_64 rng(13);
  ParameterStore ps;
  ps.add("A", {4, 4}) = random_tensor({4, 4}, rng);
  ps.add("x", {4}) = random_tensor({4}, rng);
  Tape tape;
  Var y = ops::softmax(ops::tanh(ops::matmul(tape.param("A", ps.get("A")), tape.param("x", ps.get("x")))));
  Var loss = ops::sum(ops::log(y));
  tape.backward(loss);
  const TensorMap first = tape.parameter_gradients();
  tape.backward(loss);
  CHECK(first == tape.parameter_gradients());
}

TEST_CASE("a parameter bound twice accumulates into one gradient") {
  ParameterStore ps;
  ps.add("w", {2}) = Tensor::vector({1.0, 2.0});
  Tape tape;
  Var a = tape.param("w", ps.get("w"));
  Var b = tape.param("w", ps.get("w"));
  CHECK(a.index() == b.index());
  tape.backward(ops::add(ops::sum(a), ops::sum(b)));
  CHECK(tape.parameter_gradients().at("w") == Tensor::vector({2.0, 2.0}));
}

TEST_CASE("parameter maps round-trip exactly") {
  std::mt19937_64 rng(17);
  TensorMap m;
  m["a"] = random_tensor({3, 2}, rng);
  m["b"] = Tensor::scalar(0.1);
  m["c"] = random_tensor({5}, rng, -1e-300, 1e300);
  std::stringstream s;
  write_tensor_map(s, m);
  CHECK(s.str().rfind(kParameterMapHeader, 0) == 0);
  CHECK(read_tensor_map(s) == m);
}

TEST_CASE("parameter map readers reject a wrong header") {
  std::stringstream s("CPG-PARAMS v9\n0\n");
  CHECK(category_of([&] { read_tensor_map(s); }) == ErrorCategory::kParse);
}

TEST_CASE("seeded helpers are reproducible") {
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 5; ++i) CHECK(uniform01(a) == uniform01(b));
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  std::mt19937_64 r(9);
  const std::vector<double> w{0.0, 1.0, 0.0};
  for (int i = 0; i < 20; ++i) CHECK(sample_index(w, r) == 1);
  CHECK_THROWS_AS(sample_index(std::vector<double>{0.0, 0.0}, r), Error);
}
