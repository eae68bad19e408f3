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

#include "gca/synthdata.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "gca/binary_io.hpp"
#include "gca/error.hpp"
#include "gca/rng.hpp"

namespace gca {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> as_eigen(const Matrix& m) {
  return Eigen::Map<const RowMajor>(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                    static_cast<Eigen::Index>(m.cols()));
}

constexpr int kMaxRedraws = 1000;

}  // namespace

std::string_view to_string(LatentKind kind) {
  switch (kind) {
    case LatentKind::IndependentLaplace:
      return "laplace";
    case LatentKind::CorrelatedGauss:
      return "gauss";
  }
  return "unknown";
}

LatentKind parse_latent_kind(std::string_view text) {
  if (text == "laplace" || text == "IndependentLaplace") return LatentKind::IndependentLaplace;
  if (text == "gauss" || text == "CorrelatedGauss") return LatentKind::CorrelatedGauss;
  throw ConfigError("unknown latent kind '" + std::string(text) + "' (expected laplace or gauss)");
}

Matrix correlated_gauss_covariance(std::size_t d_s) {
  Matrix c = Matrix::identity(d_s);
  for (std::size_t i = 0; i + 1 < d_s; ++i) {
    c(i, i + 1) = 0.3;
    c(i + 1, i) = 0.3;
  }
  return c;
}

Matrix correlated_gauss_cholesky(std::size_t d_s) {
  const Matrix c = correlated_gauss_covariance(d_s);
  Eigen::LLT<Eigen::MatrixXd> llt(as_eigen(c));
  if (llt.info() != Eigen::Success) throw NumericError("covariance is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  Matrix out(d_s, d_s);
  for (std::size_t i = 0; i < d_s; ++i) {
    for (std::size_t j = 0; j < d_s; ++j) out(i, j) = l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return out;
}

Matrix sample_latents(const LatentConfig& cfg, std::uint64_t seed) {
  if (cfg.d_s < 1) throw ConfigError("latent dimension must be >= 1");
  Rng rng(seed);
  Matrix s(cfg.n, cfg.d_s);
  switch (cfg.kind) {
    case LatentKind::IndependentLaplace: {
      const double scale = 1.0 / std::sqrt(2.0);
      for (double& v : s.data()) v = rng.laplace(scale);
      break;
    }
    case LatentKind::CorrelatedGauss: {
      const Matrix l = correlated_gauss_cholesky(cfg.d_s);
      std::vector<double> z(cfg.d_s);
      for (std::size_t r = 0; r < cfg.n; ++r) {
        for (double& v : z) v = rng.normal();
        auto row = s.row(r);
        for (std::size_t i = 0; i < cfg.d_s; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j <= i; ++j) acc += l(i, j) * z[j];
          row[i] = acc;
        }
      }
      break;
    }
  }
  return s;
}

void LinkModel::validate() const {
  if (K < 1) throw ConfigError("maximum link state K must be >= 1");
  if (alpha.rows() != K || alpha.cols() < 1) {
    throw ShapeError("alpha must be K x d_s with K = " + std::to_string(K) + ", got " + shape_string(alpha));
  }
  if (!alpha.all_finite()) throw NumericError("alpha has non-finite entries");
}

LinkModel build_link_model(std::size_t d_s, std::size_t K, std::uint64_t seed) {
  if (K < 1) throw ConfigError("maximum link state K must be >= 1");
  if (d_s < 1) throw ConfigError("latent dimension must be >= 1");
  Rng rng(seed);
  LinkModel model{K, Matrix(K, d_s)};
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < d_s; ++i) {
      const double eps = rng.uniform();
      model.alpha(k, i) = (i == k ? 1.0 : 0.0) + 0.1 * eps;
    }
  }
  return model;
}

std::vector<double> link_prob(const LinkModel& model, std::span<const double> s, std::span<const double> s_prime) {
  const std::size_t d = model.d_s();
  if (s.size() != d || s_prime.size() != d) {
    throw ShapeError("link_prob: latent vectors must have length " + std::to_string(d));
  }
  std::vector<double> logits(model.K, 0.0);
  for (std::size_t k = 0; k < model.K; ++k) {
    auto a = model.alpha.row(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += a[i] * (s[i] * s_prime[i]);
    logits[k] = acc;
  }
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericError("link_prob: non-finite logit");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& v : logits) {
    v = std::exp(v - m);
    z += v;
  }
  for (double& v : logits) v /= z;
  return logits;
}

int sample_link(const LinkModel& model, std::span<const double> s, std::span<const double> s_prime,
                std::uint64_t key) {
  const std::vector<double> p = link_prob(model, s, s_prime);
  Rng rng(key);
  const double u = rng.uniform();
  double cdf = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    cdf += p[k];
    if (u < cdf) return static_cast<int>(k + 1);
  }
  // Rounding left cdf slightly below 1; return the last state with mass.
  for (std::size_t k = p.size(); k-- > 0;) {
    if (p[k] > 0.0) return static_cast<int>(k + 1);
  }
  return static_cast<int>(p.size());
}

double min_singular_value(const Matrix& m) {
  if (m.empty()) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_eigen(m));
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

MlpSpec MixingNetwork::make_spec(std::size_t d_s, std::size_t d_x) {
  return MlpSpec{{d_s, d_x, d_x, d_x}, Activation::leaky_relu(kSlope)};
}

MixingNetwork::MixingNetwork(std::size_t d_s, std::size_t d_x, ParamStore params)
    : d_s_(d_s), d_x_(d_x), spec_(make_spec(d_s, d_x)), params_(std::move(params)) {
  if (d_s < 1 || d_x < 1) throw ConfigError("mixing network dimensions must be >= 1");
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    const Matrix w = params_.get(weight_name("mix", l));
    if (w.rows() != spec_.layer_widths[l] || w.cols() != spec_.layer_widths[l + 1]) {
      throw ShapeError("mixing layer " + std::to_string(l) + " has weight " + shape_string(w));
    }
    if (!w.all_finite()) throw NumericError("mixing layer " + std::to_string(l) + " has non-finite weights");
    const double smin = min_singular_value(w);
    if (!(smin > kMinSingularValue)) {
      throw NumericError("mixing layer " + std::to_string(l) + " is ill-conditioned (min singular value " +
                         std::to_string(smin) + ")");
    }
  }
}

MixingNetwork MixingNetwork::random(std::size_t d_s, std::size_t d_x, std::uint64_t seed) {
  if (d_s < 1 || d_x < 1) throw ConfigError("mixing network dimensions must be >= 1");
  const MlpSpec spec = make_spec(d_s, d_x);
  Rng rng(seed);
  ParamStore params;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.layer_widths[l], out = spec.layer_widths[l + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix w(in, out);
    int attempt = 0;
    do {
      if (++attempt > kMaxRedraws) throw NumericError("could not draw a well-conditioned mixing layer");
      for (double& v : w.data()) v = a * (2.0 * rng.uniform() - 1.0);
    } while (!(min_singular_value(w) > kMinSingularValue));
    params.add(weight_name("mix", l), w);
    params.add(bias_name("mix", l), Matrix(1, out));
  }
  return MixingNetwork(d_s, d_x, std::move(params));
}

MixingNetwork MixingNetwork::identity(std::size_t d) {
  ParamStore params;
  for (std::size_t l = 0; l < 3; ++l) {
    params.add(weight_name("mix", l), Matrix::identity(d));
    params.add(bias_name("mix", l), Matrix(1, d));
  }
  return MixingNetwork(d, d, std::move(params));
}

Matrix MixingNetwork::apply(const Matrix& s) const {
  if (s.cols() != d_s_) {
    throw ShapeError("mixing network expects " + std::to_string(d_s_) + " latent columns, got " +
                     std::to_string(s.cols()));
  }
  return mlp_apply(spec_, params_, "mix", s);
}

GraphDataset::GraphDataset(Matrix x, Matrix s_true, std::uint64_t link_seed, LinkModel link_model)
    : x_(std::move(x)), s_true_(std::move(s_true)), link_seed_(link_seed), link_model_(std::move(link_model)) {
  link_model_.validate();
  if (x_.rows() != s_true_.rows()) {
    throw ShapeError("features have " + std::to_string(x_.rows()) + " rows but latents have " +
                     std::to_string(s_true_.rows()));
  }
  if (s_true_.cols() != link_model_.d_s()) {
    throw ShapeError("latent dimension " + std::to_string(s_true_.cols()) + " does not match link model d_s " +
                     std::to_string(link_model_.d_s()));
  }
}

int GraphDataset::link_weight(std::size_t i, std::size_t j) const {
  if (i == j) throw ConfigError("link_weight: self-links are not defined (i = j = " + std::to_string(i) + ")");
  if (i >= n() || j >= n()) {
    throw ConfigError("link_weight: node index out of range (n = " + std::to_string(n()) + ")");
  }
  const std::size_t lo = std::min(i, j), hi = std::max(i, j);
  return sample_link(link_model_, s_true_.row(lo), s_true_.row(hi), pair_key(link_seed_, lo, hi));
}

GraphDataset dataset_from_latents(Matrix latents, const MixingNetwork& mixing, const LinkModel& link_model,
                                  std::uint64_t link_seed) {
  if (latents.cols() != mixing.d_s()) {
    throw ShapeError("latent dimension " + std::to_string(latents.cols()) + " does not match mixing d_s " +
                     std::to_string(mixing.d_s()));
  }
  Matrix x = mixing.apply(latents);
  return GraphDataset(std::move(x), std::move(latents), link_seed, link_model);
}

GraphDataset generate_dataset(const LatentConfig& latent_cfg, const MixingNetwork& mixing,
                              const LinkModel& link_model, const DatasetSeeds& seeds) {
  if (latent_cfg.d_s != mixing.d_s()) {
    throw ShapeError("latent config d_s " + std::to_string(latent_cfg.d_s) + " does not match mixing d_s " +
                     std::to_string(mixing.d_s()));
  }
  return dataset_from_latents(sample_latents(latent_cfg, seeds.latents), mixing, link_model, seeds.links);
}

void write_dataset(std::ostream& out, const GraphDataset& ds) {
  using namespace binary;
  write_magic(out, "GCA1");
  write_u32(out, static_cast<std::uint32_t>(ds.n()));
  write_u32(out, static_cast<std::uint32_t>(ds.d_s()));
  write_u32(out, static_cast<std::uint32_t>(ds.d_x()));
  write_u32(out, static_cast<std::uint32_t>(ds.K()));
  write_u64(out, ds.link_seed());
  write_f64s(out, ds.link_model().alpha.data());
  write_f64s(out, ds.latents().data());
  write_f64s(out, ds.features().data());
  if (!out) throw FormatError("failed writing dataset");
}

GraphDataset read_dataset(std::istream& in) {
  using namespace binary;
  expect_magic(in, "GCA1");
  const std::uint32_t n = read_u32(in, "n");
  const std::uint32_t d_s = read_u32(in, "d_s");
  const std::uint32_t d_x = read_u32(in, "d_x");
  const std::uint32_t K = read_u32(in, "K");
  if (d_s == 0 || d_x == 0 || K == 0) throw FormatError("dataset header has a zero dimension");
  const std::uint64_t link_seed = read_u64(in, "link_seed");
  LinkModel model{K, Matrix(K, d_s)};
  read_f64s(in, model.alpha.data(), "alpha");
  Matrix s(n, d_s);
  read_f64s(in, s.data(), "latents");
  Matrix x(n, d_x);
  read_f64s(in, x.data(), "features");
  expect_eof(in);
  return GraphDataset(std::move(x), std::move(s), link_seed, std::move(model));
}

void save_dataset(const std::filesystem::path& path, const GraphDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
}

GraphDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace gca
