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

// Pieces shared by the GCA estimator and the EBM baseline: the encoder
// network, training configuration, pair minibatch sampling and the Adam
// training loop.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "gca/autodiff.hpp"
#include "gca/matrix.hpp"
#include "gca/mlp.hpp"
#include "gca/params.hpp"
#include "gca/rng.hpp"

namespace gca {

/// Encoder h: five affine layers d_x -> 50 -> 50 -> 50 -> 50 -> d_s with
/// ReLU hidden activations and a linear output. Parameters live under the
/// "enc" prefix.
struct EncoderNetwork {
  static constexpr std::size_t kHiddenWidth = 50;
  static constexpr std::size_t kNumLayers = 5;
  static constexpr const char* kPrefix = "enc";

  MlpSpec spec;
  ParamStore params;

  static MlpSpec make_spec(std::size_t d_x, std::size_t d_s);
  static EncoderNetwork init(std::size_t d_x, std::size_t d_s, Rng& rng);
  /// All-zero parameters; used as a layout when reading checkpoints.
  static EncoderNetwork zeros(std::size_t d_x, std::size_t d_s);

  std::size_t d_x() const { return spec.input_width(); }
  std::size_t d_s() const { return spec.output_width(); }

  /// Row-wise encoding of features.
  Matrix encode(const Matrix& x) const;
};

struct TrainConfig {
  std::size_t minibatch_size = 100;
  std::size_t iterations = 100000;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  std::size_t eval_every = 100;

  /// Throws ConfigError unless minibatch_size, lr and eval_every are
  /// positive. iterations may be zero (returns the initial model).
  void validate() const;
};

struct LossPoint {
  std::size_t iteration = 0;
  double loss = 0.0;
};

/// Loss values recorded every eval_every iterations plus the final one.
struct LossTrace {
  std::vector<LossPoint> points;

  bool empty() const { return points.empty(); }
  double final_loss() const;
};

/// Total number of unordered node pairs, n (n - 1) / 2.
std::uint64_t num_pairs(std::size_t n);

/// Maps a linear index in [0, num_pairs(n)) to the pair (i, j), i < j, in
/// row-major order of the strict upper triangle.
std::pair<std::size_t, std::size_t> pair_from_index(std::size_t n, std::uint64_t t);

/// m distinct pairs drawn uniformly without replacement from
/// {(i, j) : 0 <= i < j < n}. Throws ConfigError if m < 2 or m exceeds the
/// number of pairs.
std::vector<std::pair<std::size_t, std::size_t>> sample_pair_indices(std::size_t n, std::size_t m, Rng& rng);

/// Random permutation of 0..m-1.
std::vector<std::size_t> random_permutation(std::size_t m, Rng& rng);

/// Named random streams of a training run, derived from TrainConfig::seed.
struct TrainStreams {
  Rng model_init;
  Rng batches;
  Rng permutations;

  explicit TrainStreams(std::uint64_t root)
      : model_init(root, "model-init"), batches(root, "batches"), permutations(root, "permutations") {}
};

/// Runs cfg.iterations Adam steps. `objective_at(it)` returns the minibatch
/// objective for iteration `it`; it is called exactly once per iteration in
/// order. NumericErrors are rethrown with the iteration index prepended.
LossTrace run_adam(ParamStore& params, const TrainConfig& cfg,
                   const std::function<ad::Objective(std::size_t)>& objective_at);

}  // namespace gca
