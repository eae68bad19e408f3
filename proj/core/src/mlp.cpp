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

#include "gca/mlp.hpp"

#include <cmath>

#include "gca/error.hpp"

namespace gca {

namespace {

void apply_activation(const Activation& act, Matrix& m) {
  switch (act.kind) {
    case ActivationKind::None:
      return;
    case ActivationKind::ReLU:
      for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
      return;
    case ActivationKind::LeakyReLU:
      for (double& v : m.data()) v = v > 0.0 ? v : act.slope * v;
      return;
  }
}

void check_layer(const MlpSpec& spec, std::size_t l, std::string_view prefix, const ParamStore& params,
                 std::size_t input_cols) {
  const std::size_t in = spec.layer_widths[l], out = spec.layer_widths[l + 1];
  if (input_cols != in) {
    throw ShapeError("layer " + std::to_string(l) + " of '" + std::string(prefix) + "' expects input width " +
                     std::to_string(in) + ", got " + std::to_string(input_cols));
  }
  const auto& w = params.entry(weight_name(prefix, l));
  const auto& b = params.entry(bias_name(prefix, l));
  if (w.rows != in || w.cols != out || b.rows != 1 || b.cols != out) {
    throw ShapeError("layer " + std::to_string(l) + " of '" + std::string(prefix) + "' has parameters " +
                     std::to_string(w.rows) + "x" + std::to_string(w.cols) + " / " + std::to_string(b.rows) + "x" +
                     std::to_string(b.cols) + ", spec wants " + std::to_string(in) + "x" + std::to_string(out));
  }
}

}  // namespace

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw ConfigError("MlpSpec needs at least two layer widths");
  for (std::size_t w : layer_widths) {
    if (w == 0) throw ConfigError("MlpSpec layer width must be positive");
  }
  if (activation.kind == ActivationKind::LeakyReLU && !(activation.slope > 0.0 && activation.slope < 1.0)) {
    throw ConfigError("LeakyReLU slope must lie in (0, 1)");
  }
}

std::string weight_name(std::string_view prefix, std::size_t layer) {
  return std::string(prefix) + ".W" + std::to_string(layer);
}

std::string bias_name(std::string_view prefix, std::size_t layer) {
  return std::string(prefix) + ".b" + std::to_string(layer);
}

void init_mlp_params(const MlpSpec& spec, std::string_view prefix, Rng& rng, ParamStore& params) {
  spec.validate();
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_widths[l], out = spec.layer_widths[l + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix w(in, out);
    for (double& v : w.data()) v = a * (2.0 * rng.uniform() - 1.0);
    params.add(weight_name(prefix, l), w);
    params.add(bias_name(prefix, l), Matrix(1, out));
  }
}

Matrix mlp_apply(const MlpSpec& spec, const ParamStore& params, std::string_view prefix, const Matrix& input) {
  spec.validate();
  Matrix h = input;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    check_layer(spec, l, prefix, params, h.cols());
    h = affine(h, params.get(weight_name(prefix, l)), params.get(bias_name(prefix, l)));
    if (l + 1 < spec.num_layers()) apply_activation(spec.activation, h);
  }
  return h;
}

ad::Var mlp_forward(ad::Tape& tape, const MlpSpec& spec, const ad::ParamVars& params, std::string_view prefix,
                    ad::Var input) {
  spec.validate();
  ad::Var h = input;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    check_layer(spec, l, prefix, params.store(), tape.value(h).cols());
    h = ad::affine(tape, h, params[weight_name(prefix, l)], params[bias_name(prefix, l)]);
    if (l + 1 < spec.num_layers()) {
      switch (spec.activation.kind) {
        case ActivationKind::None:
          break;
        case ActivationKind::ReLU:
          h = ad::relu(tape, h);
          break;
        case ActivationKind::LeakyReLU:
          h = ad::leaky_relu(tape, h, spec.activation.slope);
          break;
      }
    }
  }
  return h;
}

}  // namespace gca
