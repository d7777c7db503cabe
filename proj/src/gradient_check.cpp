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

#include "cpg/gradient_check.hpp"

#include <algorithm>
#include <cmath>

namespace cpg {

double relative_error(double analytic, double numeric) noexcept {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradientCheckReport gradient_check(const LossBuilder& loss, ParameterStore params, double step, Stencil stencil) {
  TensorMap analytic;
  {
    Tape tape;
    Var l = loss(tape, params);
    tape.backward(l);
    analytic = tape.parameter_gradients();
  }
  auto evaluate = [&]() {
    Tape tape(Tape::Mode::kInference);
    return loss(tape, params).item();
  };

  GradientCheckReport report;
  for (auto& [name, tensor] : params.tensors()) {
    const auto it = analytic.find(name);
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor[i];
      auto at = [&](double offset) {
        tensor[i] = saved + offset;
        return evaluate();
      };
      double numeric = 0.0;
      if (stencil == Stencil::kCentral2) {
        numeric = (at(step) - at(-step)) / (2.0 * step);
      } else {
        numeric = (-at(2 * step) + 8 * at(step) - 8 * at(-step) + at(-2 * step)) / (12.0 * step);
      }
      tensor[i] = saved;
      const double exact = it == analytic.end() ? 0.0 : it->second[i];
      const double err = relative_error(exact, numeric);
      ++report.components;
      if (report.worst_parameter.empty() || err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_parameter = name;
        report.worst_index = i;
        report.analytic = exact;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace cpg
