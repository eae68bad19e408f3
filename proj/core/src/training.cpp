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

#include "gca/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gca/adam.hpp"
#include "gca/error.hpp"

namespace gca {

MlpSpec EncoderNetwork::make_spec(std::size_t d_x, std::size_t d_s) {
  std::vector<std::size_t> widths{d_x};
  for (std::size_t l = 0; l + 1 < kNumLayers; ++l) widths.push_back(kHiddenWidth);
  widths.push_back(d_s);
  return MlpSpec{std::move(widths), Activation::relu()};
}

EncoderNetwork EncoderNetwork::init(std::size_t d_x, std::size_t d_s, Rng& rng) {
  EncoderNetwork enc{make_spec(d_x, d_s), {}};
  init_mlp_params(enc.spec, kPrefix, rng, enc.params);
  return enc;
}

EncoderNetwork EncoderNetwork::zeros(std::size_t d_x, std::size_t d_s) {
  EncoderNetwork enc{make_spec(d_x, d_s), {}};
  for (std::size_t l = 0; l < enc.spec.num_layers(); ++l) {
    const std::size_t in = enc.spec.layer_widths[l], out = enc.spec.layer_widths[l + 1];
    enc.params.add(weight_name(kPrefix, l), Matrix(in, out));
    enc.params.add(bias_name(kPrefix, l), Matrix(1, out));
  }
  return enc;
}

Matrix EncoderNetwork::encode(const Matrix& x) const { return mlp_apply(spec, params, kPrefix, x); }

void TrainConfig::validate() const {
  if (minibatch_size == 0) throw ConfigError("minibatch_size must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
  if (eval_every == 0) throw ConfigError("eval_every must be positive");
}

double LossTrace::final_loss() const {
  if (points.empty()) return std::nan("");
  return points.back().loss;
}

std::uint64_t num_pairs(std::size_t n) {
  const auto nn = static_cast<std::uint64_t>(n);
  return nn < 2 ? 0 : nn * (nn - 1) / 2;
}

std::pair<std::size_t, std::size_t> pair_from_index(std::size_t n, std::uint64_t t) {
  if (t >= num_pairs(n)) throw ConfigError("pair index out of range");
  // Row i starts at offset(i) = i (2n - i - 1) / 2.
  const auto nn = static_cast<std::uint64_t>(n);
  auto offset = [nn](std::uint64_t i) { return i * (2 * nn - i - 1) / 2; };
  const double b = 2.0 * static_cast<double>(nn) - 1.0;
  auto i = static_cast<std::uint64_t>(std::max(0.0, std::floor((b - std::sqrt(b * b - 8.0 * static_cast<double>(t))) / 2.0)));
  if (i > nn - 2) i = nn - 2;
  while (i > 0 && offset(i) > t) --i;
  while (i + 1 <= nn - 2 && offset(i + 1) <= t) ++i;
  const std::uint64_t j = i + 1 + (t - offset(i));
  return {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
}

std::vector<std::pair<std::size_t, std::size_t>> sample_pair_indices(std::size_t n, std::size_t m, Rng& rng) {
  if (m < 2) throw ConfigError("minibatch must contain at least 2 pairs");
  const std::uint64_t total = num_pairs(n);
  if (m > total) {
    throw ConfigError("minibatch of " + std::to_string(m) + " pairs exceeds the " + std::to_string(total) +
                      " available pairs");
  }
  // Floyd's algorithm: m distinct indices from [0, total).
  std::vector<std::uint64_t> chosen;
  chosen.reserve(m);
  for (std::uint64_t j = total - m; j < total; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    const bool seen = std::find(chosen.begin(), chosen.end(), t) != chosen.end();
    chosen.push_back(seen ? j : t);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(m);
  for (std::uint64_t t : chosen) pairs.push_back(pair_from_index(n, t));
  return pairs;
}

std::vector<std::size_t> random_permutation(std::size_t m, Rng& rng) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(perm));
  return perm;
}

LossTrace run_adam(ParamStore& params, const TrainConfig& cfg,
                   const std::function<ad::Objective(std::size_t)>& objective_at) {
  cfg.validate();
  LossTrace trace;
  AdamState state(params.size(), AdamHyper{cfg.lr});
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    try {
      const ad::Objective objective = objective_at(it);
      const ad::ValueAndGrad vg = ad::value_and_grad(objective, params);
      if (it % cfg.eval_every == 0 || it + 1 == cfg.iterations) trace.points.push_back({it, vg.value});
      adam_step(state, params, vg.grad);
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(it) + ": " + e.what());
    }
  }
  return trace;
}

}  // namespace gca
