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

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gca/autodiff.hpp"
#include "gca/matrix.hpp"
#include "gca/params.hpp"
#include "gca/rng.hpp"

namespace gca {

enum class ActivationKind { None, ReLU, LeakyReLU };

struct Activation {
  ActivationKind kind = ActivationKind::None;
  double slope = 0.0;  // only used by LeakyReLU

  static Activation none() { return {}; }
  static Activation relu() { return {ActivationKind::ReLU, 0.0}; }
  static Activation leaky_relu(double slope) { return {ActivationKind::LeakyReLU, slope}; }
};

/// Feed-forward network shape. `layer_widths` lists input, hidden and
/// output widths, so a spec with L+1 widths has L affine layers. The hidden
/// activation follows every layer except the last; the last layer is linear.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  Activation activation;

  std::size_t num_layers() const { return layer_widths.size() - 1; }
  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t output_width() const { return layer_widths.back(); }

  /// Throws ConfigError unless there are >= 2 positive widths and a
  /// LeakyReLU slope lies in (0, 1).
  void validate() const;
};

/// Parameter names are "<prefix>.W<l>" (in x out) and "<prefix>.b<l>" (1 x out).
std::string weight_name(std::string_view prefix, std::size_t layer);
std::string bias_name(std::string_view prefix, std::size_t layer);

/// Adds the tensors of `spec` to `params`. Weights are uniform on
/// [-a, a] with a = sqrt(6 / (fan_in + fan_out)); biases are zero.
void init_mlp_params(const MlpSpec& spec, std::string_view prefix, Rng& rng, ParamStore& params);

/// Applies the network row-wise. Throws ShapeError naming the offending layer.
Matrix mlp_apply(const MlpSpec& spec, const ParamStore& params, std::string_view prefix,
                 const Matrix& input);

/// Same network recorded on a tape.
ad::Var mlp_forward(ad::Tape& tape, const MlpSpec& spec, const ad::ParamVars& params,
                    std::string_view prefix, ad::Var input);

}  // namespace gca
