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

// Synthetic graph data: i.i.d. latent node vectors, a shared nonlinear
// mixing network producing node features, and discrete symmetric link
// weights drawn from a softmax over bilinear latent interactions:
//
//   p(w = k | s, s') = exp(sum_i alpha[k][i] s_i s'_i) / sum_k' exp(...)
//
// for k in {1, ..., K}.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "gca/matrix.hpp"
#include "gca/mlp.hpp"
#include "gca/params.hpp"

namespace gca {

enum class LatentKind { IndependentLaplace, CorrelatedGauss };

std::string_view to_string(LatentKind kind);
LatentKind parse_latent_kind(std::string_view text);

struct LatentConfig {
  LatentKind kind = LatentKind::IndependentLaplace;
  std::size_t d_s = 1;
  std::size_t n = 0;
};

/// Covariance of the correlated Gaussian: 1 on the diagonal, 0.3 on the
/// first off-diagonals, 0 elsewhere.
Matrix correlated_gauss_covariance(std::size_t d_s);

/// Lower Cholesky factor L of correlated_gauss_covariance(d_s), L L^T = C.
Matrix correlated_gauss_cholesky(std::size_t d_s);

/// n x d_s matrix of i.i.d. latent rows. Laplace coordinates have density
/// proportional to exp(-sqrt(2)|s|), i.e. unit variance.
Matrix sample_latents(const LatentConfig& cfg, std::uint64_t seed);

/// Coefficient table of the link distribution. Row k-1 holds alpha^k.
struct LinkModel {
  std::size_t K = 1;
  Matrix alpha;  // K x d_s

  std::size_t d_s() const { return alpha.cols(); }
  void validate() const;
};

/// alpha^k_i = 1 + 0.1 eps when i == k, else 0.1 eps, eps ~ U[0, 1].
LinkModel build_link_model(std::size_t d_s, std::size_t K, std::uint64_t seed);

/// Probability of each state 1..K (index k-1) given a latent pair.
std::vector<double> link_prob(const LinkModel& model, std::span<const double> s, std::span<const double> s_prime);

/// Draws a state in {1..K} from link_prob with a single uniform from `key`.
int sample_link(const LinkModel& model, std::span<const double> s, std::span<const double> s_prime,
                std::uint64_t key);

/// Generator network f: three affine layers d_s -> d_x -> d_x -> d_x with
/// LeakyReLU(0.2) between them and a linear output.
class MixingNetwork {
 public:
  static constexpr double kSlope = 0.2;
  static constexpr double kMinSingularValue = 1e-3;

  /// Random weights; each layer is redrawn until its smallest singular
  /// value exceeds kMinSingularValue. d_s > d_x is allowed (the map is then
  /// not injective).
  static MixingNetwork random(std::size_t d_s, std::size_t d_x, std::uint64_t seed);

  /// Identity weights and zero biases (requires d_s == d_x).
  static MixingNetwork identity(std::size_t d);

  /// Wraps existing parameters; runs the conditioning guard.
  MixingNetwork(std::size_t d_s, std::size_t d_x, ParamStore params);

  Matrix apply(const Matrix& s) const;

  std::size_t d_s() const { return d_s_; }
  std::size_t d_x() const { return d_x_; }
  const MlpSpec& spec() const { return spec_; }
  const ParamStore& params() const { return params_; }

  static MlpSpec make_spec(std::size_t d_s, std::size_t d_x);

 private:
  std::size_t d_s_;
  std::size_t d_x_;
  MlpSpec spec_;
  ParamStore params_;
};

/// Smallest singular value of a matrix (the min(rows, cols)-th one).
double min_singular_value(const Matrix& m);

/// Node features plus lazily materialized link weights.
///
/// w(i, j) is drawn once per unordered pair from a stream keyed by
/// (link_seed, min(i, j), max(i, j)), so it is symmetric and every query
/// returns the same value without storing n(n-1)/2 weights.
class GraphDataset {
 public:
  GraphDataset(Matrix x, Matrix s_true, std::uint64_t link_seed, LinkModel link_model);

  std::size_t n() const { return x_.rows(); }
  std::size_t d_x() const { return x_.cols(); }
  std::size_t d_s() const { return s_true_.cols(); }
  std::size_t K() const { return link_model_.K; }

  const Matrix& features() const { return x_; }
  /// Ground-truth latents. Evaluation only; training code never reads them.
  const Matrix& latents() const { return s_true_; }
  std::uint64_t link_seed() const { return link_seed_; }
  const LinkModel& link_model() const { return link_model_; }

  /// Link weight in {1..K}. Throws ConfigError for i == j or out-of-range nodes.
  int link_weight(std::size_t i, std::size_t j) const;

 private:
  Matrix x_;
  Matrix s_true_;
  std::uint64_t link_seed_;
  LinkModel link_model_;
};

struct DatasetSeeds {
  std::uint64_t latents = 0;
  std::uint64_t links = 0;
};

GraphDataset generate_dataset(const LatentConfig& latent_cfg, const MixingNetwork& mixing,
                              const LinkModel& link_model, const DatasetSeeds& seeds);

/// Builds a dataset from given latents (rows pushed through `mixing`).
GraphDataset dataset_from_latents(Matrix latents, const MixingNetwork& mixing, const LinkModel& link_model,
                                  std::uint64_t link_seed);

// Binary dataset file, little-endian:
//   "GCA1" | u32 n, d_s, d_x, K | u64 link_seed | alpha (K*d_s f64)
//   | s_true (n*d_s f64) | x (n*d_x f64)
void write_dataset(std::ostream& out, const GraphDataset& ds);
GraphDataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const GraphDataset& ds);
GraphDataset load_dataset(const std::filesystem::path& path);

}  // namespace gca
