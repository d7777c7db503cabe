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
#include <functional>
#include <string>

#include "cpg/autodiff.hpp"
#include "cpg/tensor.hpp"

namespace cpg {

// Builds a scalar loss on `tape` from the tensors in `params`. Must be
// deterministic: the checker calls it once per perturbed component.
using LossBuilder = std::function<Var(Tape& tape, const ParameterStore& params)>;

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t components = 0;
};

enum class Stencil {
  kCentral2,  // (f(x+h) - f(x-h)) / 2h
  kCentral4,  // (-f(x+2h) + 8f(x+h) - 8f(x-h) + f(x-2h)) / 12h
};

/// Compares reverse-mode gradients against central differences over every
/// component of every parameter. Relative error per component is
/// |g_a - g_n| / max(1e-8, |g_a| + |g_n|).
GradientCheckReport gradient_check(const LossBuilder& loss, ParameterStore params, double step = 1e-5,
                                   Stencil stencil = Stencil::kCentral2);

double relative_error(double analytic, double numeric) noexcept;

}  // namespace cpg
