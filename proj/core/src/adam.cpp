// Copyright 2026 The GCA Authors.
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

#include "gca/adam.hpp"

#include <cmath>
#include <string>

#include "gca/error.hpp"

namespace gca {

void adam_step(AdamState& state, ParamStore& params, std::span<const double> grad) {
  const std::size_t n = params.size();
  if (grad.size() != n) {
    throw ShapeError("adam_step: gradient has " + std::to_string(grad.size()) + " entries, parameters have " +
                     std::to_string(n));
  }
  if (state.m.size() != n || state.v.size() != n) {
    throw ShapeError("adam_step: optimizer state sized for " + std::to_string(state.m.size()) +
                     " parameters, got " + std::to_string(n));
  }
  const AdamHyper& h = state.hyper;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  auto theta = params.flat();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * g;
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    theta[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
  }
}

}  // namespace gca
