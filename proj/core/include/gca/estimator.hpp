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

// Graph component analysis: a bilinear log-ratio model
//
//   r(w, x, x') = sum_i beta[w][i] h_i(x) h_i(x') + b[w]
//
// fitted by minimizing the empirical Donsker-Varadhan objective
//
//   J = -mean r(w_ij, x_i, x_j) + log mean exp r(w*_ij, x_i, x_j)
//
// where w* is the batch's weight column under a random permutation. The
// trained encoder h recovers the latents up to permutation and scale.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "gca/autodiff.hpp"
#include "gca/synthdata.hpp"
#include "gca/training.hpp"

namespace gca {

/// beta is K x d_s (row w-1 holds beta^w); bias is K x 1.
struct RatioParams {
  Matrix beta;
  Matrix bias;

  std::size_t K() const { return beta.rows(); }
  std::size_t d_s() const { return beta.cols(); }
  void validate() const;

  /// beta^w_i = 1 + 0.1 eps when i == w, else 0.1 eps; b^w = 0.
  static RatioParams init(std::size_t K, std::size_t d_s, Rng& rng);
};

struct GcaModel {
  EncoderNetwork encoder;
  RatioParams ratio;

  static GcaModel init(std::size_t d_x, std::size_t d_s, std::size_t K, std::uint64_t seed);

  /// Encoder tensors followed by "ratio.beta" and "ratio.bias".
  ParamStore to_params() const;
  static GcaModel from_params(std::size_t d_x, std::size_t d_s, std::size_t K, const ParamStore& params);
};

/// One sampled pair with its observed link weight (1-based).
struct PairSample {
  std::size_t i = 0;
  std::size_t j = 0;
  int w = 1;
};

/// r(w, x, x'). Throws ConfigError when w is outside {1..K}.
double ratio_value(const EncoderNetwork& enc, const RatioParams& rp, int w, std::span<const double> x,
                   std::span<const double> x_prime);

/// m pairs uniformly without replacement from {(i, j): i < j} with weights.
std::vector<PairSample> sample_pair_batch(const GraphDataset& ds, std::size_t m, Rng& rng);

/// Minibatch inputs for the objective: features of both endpoints, the
/// observed weights and the permuted weights.
struct GcaBatch {
  Matrix x_first;   // m x d_x
  Matrix x_second;  // m x d_x
  std::vector<int> weights;
  std::vector<int> permuted_weights;
};

GcaBatch make_gca_batch(const Matrix& features, std::span<const PairSample> pairs,
                        std::span<const std::size_t> permutation);

/// Records the empirical DV objective on a tape. Parameters are looked up
/// by name ("enc.*", "ratio.beta", "ratio.bias").
ad::Var gca_dv_objective(ad::Tape& tape, const ad::ParamVars& params, const MlpSpec& encoder_spec,
                         const GcaBatch& batch);

/// Objective closure for a fixed batch.
ad::Objective gca_objective(const MlpSpec& encoder_spec, GcaBatch batch);

/// Value of the empirical DV objective. Throws ConfigError if the permuted
/// weights are not a permutation of the weights.
double dv_empirical_objective(const EncoderNetwork& enc, const RatioParams& rp, const GcaBatch& batch);

struct GcaTrainResult {
  GcaModel model;
  LossTrace trace;
};

/// Fits the model by Adam on fresh minibatches; the weight permutation is
/// redrawn every iteration.
GcaTrainResult train_gca(const GraphDataset& ds, const TrainConfig& cfg);

/// Same, starting from a given model.
GcaTrainResult train_gca(const GraphDataset& ds, const TrainConfig& cfg, GcaModel initial);

// Checkpoint, little-endian:
//   "GCAM" | u32 d_x, d_s, K, hidden_width, num_layers | all tensors (f64)
void write_gca_checkpoint(std::ostream& out, const GcaModel& model);
GcaModel read_gca_checkpoint(std::istream& in);
void save_gca_checkpoint(const std::filesystem::path& path, const GcaModel& model);
GcaModel load_gca_checkpoint(const std::filesystem::path& path);

}  // namespace gca
