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

// Energy-based baseline that ignores link weights:
//
//   r(x, x') = h(x)^T h(x') + a(h(x)),   a(u) = u^T v + c
//
// trained with the same DV objective, with negatives formed by permuting
// the second endpoint of each pair within the minibatch.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>

#include "gca/training.hpp"

namespace gca {

struct EbmParams {
  EncoderNetwork encoder;
  Matrix head_w;  // d_s x 1
  Matrix head_b;  // 1 x 1

  /// Same encoder recipe as GCA; head weights use the same uniform init.
  static EbmParams init(std::size_t d_x, std::size_t d_s, std::uint64_t seed);

  /// Encoder tensors followed by "head.W0" and "head.b0".
  ParamStore to_params() const;
  static EbmParams from_params(std::size_t d_x, std::size_t d_s, const ParamStore& params);
};

double ebm_ratio(const EbmParams& p, std::span<const double> x, std::span<const double> x_prime);

struct EbmBatch {
  Matrix x_first;   // m x d_x
  Matrix x_second;  // m x d_x
  std::vector<std::size_t> permutation;  // negatives pair x_first[p] with x_second[permutation[p]]
};

EbmBatch make_ebm_batch(const Matrix& features, std::span<const std::pair<std::size_t, std::size_t>> pairs,
                        std::vector<std::size_t> permutation);

ad::Var ebm_dv_objective(ad::Tape& tape, const ad::ParamVars& params, const MlpSpec& encoder_spec,
                         const EbmBatch& batch);
ad::Objective ebm_objective(const MlpSpec& encoder_spec, EbmBatch batch);
double ebm_empirical_objective(const EbmParams& p, const EbmBatch& batch);

struct EbmTrainResult {
  EbmParams params;
  LossTrace trace;
};

/// Trains on node features only; link weights are not part of the input.
EbmTrainResult train_ebm(const Matrix& features, std::size_t d_s, const TrainConfig& cfg);

// Checkpoint, little-endian:
//   "EBMM" | u32 d_x, d_s, hidden_width, num_layers | all tensors (f64)
void write_ebm_checkpoint(std::ostream& out, const EbmParams& p);
EbmParams read_ebm_checkpoint(std::istream& in);
void save_ebm_checkpoint(const std::filesystem::path& path, const EbmParams& p);
EbmParams load_ebm_checkpoint(const std::filesystem::path& path);

}  // namespace gca
