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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "../common/oracles.hpp"
#include "gca/error.hpp"
#include "gca/rng.hpp"
#include "gca/synthdata.hpp"

namespace gca {
namespace {

TEST(Latents, EmptyWhenNIsZero) {
  const Matrix s = sample_latents({LatentKind::IndependentLaplace, 3, 0}, 1);
  EXPECT_EQ(s.rows(), 0u);
  EXPECT_EQ(s.cols(), 3u);
}

TEST(Latents, LaplaceHasUnitVariance) {
  const Matrix s = sample_latents({LatentKind::IndependentLaplace, 3, 100000}, 7);
  const Matrix cov = testing::sample_covariance(s);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(cov(i, i), 1.0, 0.02);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) EXPECT_NEAR(cov(i, j), 0.0, 0.02);
    }
  }
}

TEST(Latents, LaplaceMeanAbsoluteValueMatchesScale) {
  // E|s| = 1/sqrt(2) for density proportional to exp(-sqrt(2)|s|).
  const Matrix s = sample_latents({LatentKind::IndependentLaplace, 1, 100000}, 8);
  double acc = 0.0;
  for (double v : s.data()) acc += std::abs(v);
  EXPECT_NEAR(acc / 100000.0, 1.0 / std::sqrt(2.0), 0.01);
}

TEST(Latents, CorrelatedGaussCovariance) {
  const Matrix s = sample_latents({LatentKind::CorrelatedGauss, 2, 100000}, 3);
  const Matrix cov = testing::sample_covariance(s);
  const Matrix expected = Matrix::from_rows({{1.0, 0.3}, {0.3, 1.0}});
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(cov(i, j), expected(i, j), 0.02);
  }
}

TEST(Latents, CholeskyFactorReproducesCovariance) {
  for (std::size_t d : {1u, 2u, 4u, 6u, 10u}) {
    const Matrix l = correlated_gauss_cholesky(d);
    const Matrix c = correlated_gauss_covariance(d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += l(i, k) * l(j, k);
        EXPECT_NEAR(acc, c(i, j), 1e-12) << "d=" << d;
        if (j > i) EXPECT_EQ(l(i, j), 0.0);
      }
      for (std::size_t j = 0; j < d; ++j) {
        const double expected = i == j ? 1.0 : (i + 1 == j || j + 1 == i ? 0.3 : 0.0);
        EXPECT_EQ(c(i, j), expected);
      }
    }
  }
}

TEST(Latents, DeterministicPerSeed) {
  const LatentConfig cfg{LatentKind::CorrelatedGauss, 4, 50};
  EXPECT_EQ(sample_latents(cfg, 5), sample_latents(cfg, 5));
  EXPECT_NE(sample_latents(cfg, 5), sample_latents(cfg, 6));
}

TEST(LinkModel, AlphaConstructionBounds) {
  const LinkModel m = build_link_model(3, 5, 11);
  ASSERT_EQ(m.alpha.rows(), 5u);
  ASSERT_EQ(m.alpha.cols(), 3u);
  for (std::size_t k = 0; k < 5; ++k) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (i == k) {
        EXPECT_GE(m.alpha(k, i), 1.0);
        EXPECT_LE(m.alpha(k, i), 1.1);
      } else {
        EXPECT_GE(m.alpha(k, i), 0.0);
        EXPECT_LE(m.alpha(k, i), 0.1);
      }
    }
  }
}

TEST(LinkModel, SameSeedSameAlphaAndShapeForSmallK) {
  EXPECT_EQ(build_link_model(4, 6, 3).alpha, build_link_model(4, 6, 3).alpha);
  const LinkModel m = build_link_model(4, 2, 3);
  EXPECT_EQ(m.alpha.rows(), 2u);
  EXPECT_EQ(m.alpha.cols(), 4u);
  EXPECT_THROW(build_link_model(4, 0, 3), ConfigError);
  EXPECT_THROW(build_link_model(0, 2, 3), ConfigError);
}

TEST(LinkProb, UniformAtZeroLatent) {
  const LinkModel m = build_link_model(3, 4, 1);
  const std::vector<double> zero(3, 0.0), other{0.3, -1.0, 2.0};
  for (double p : link_prob(m, zero, other)) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(LinkProb, SoftmaxOracle) {
  const LinkModel m{2, Matrix::from_rows({{1.0}, {2.0}})};
  const std::vector<double> one{1.0};
  const auto p = link_prob(m, one, one);
  const double z = std::exp(1.0) + std::exp(2.0);
  EXPECT_NEAR(p[0], std::exp(1.0) / z, 1e-15);
  EXPECT_NEAR(p[1], std::exp(2.0) / z, 1e-15);
}

TEST(LinkProb, NormalizedForRandomInputs) {
  const LinkModel m = build_link_model(4, 7, 2);
  Rng rng(99);
  std::vector<double> s(4), sp(4);
  for (int t = 0; t < 10000; ++t) {
    for (auto& v : s) v = 3.0 * rng.normal();
    for (auto& v : sp) v = 3.0 * rng.normal();
    const auto p = link_prob(m, s, sp);
    double total = 0.0;
    for (double v : p) {
      ASSERT_GE(v, 0.0);
      total += v;
    }
    ASSERT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(LinkProb, LargeLogitsDoNotOverflow) {
  const LinkModel m{2, Matrix::from_rows({{1.0}, {1.5}})};
  const std::vector<double> s{40.0};
  const auto p = link_prob(m, s, s);  // logits 1600 and 2400
  EXPECT_TRUE(std::isfinite(p[0]) && std::isfinite(p[1]));
  EXPECT_NEAR(p[1], 1.0, 1e-12);
}

TEST(LinkWeight, FrequenciesWithinThreeSigma) {
  const LinkModel m = build_link_model(3, 5, 4);
  const std::vector<double> s{0.8, -0.5, 1.2}, sp{1.1, 0.4, 0.9};
  const auto f = testing::link_frequencies(m, s, sp, 317, 2024);
  EXPECT_GE(f.draws, 100000u);
  EXPECT_LT(f.max_abs_z, 3.0);
}

TEST(LinkWeight, SymmetricStableAndInRange) {
  const auto mixing = MixingNetwork::random(3, 3, 1);
  const auto ds = generate_dataset({LatentKind::IndependentLaplace, 3, 200}, mixing, build_link_model(3, 4, 2), {3, 4});
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = i + 1; j < ds.n(); ++j) {
      const int w = ds.link_weight(i, j);
      ASSERT_EQ(w, ds.link_weight(j, i));
      ASSERT_GE(w, 1);
      ASSERT_LE(w, 4);
    }
  }
  EXPECT_EQ(testing::weight_hash(ds), testing::weight_hash(ds));
}

TEST(LinkWeight, SingleStateAlwaysOne) {
  const auto ds = generate_dataset({LatentKind::IndependentLaplace, 2, 30}, MixingNetwork::random(2, 2, 1),
                                   build_link_model(2, 1, 2), {3, 4});
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = i + 1; j < ds.n(); ++j) EXPECT_EQ(ds.link_weight(i, j), 1);
  }
}

TEST(LinkWeight, RejectsSelfLinksAndOutOfRange) {
  const auto ds = generate_dataset({LatentKind::IndependentLaplace, 2, 5}, MixingNetwork::random(2, 2, 1),
                                   build_link_model(2, 3, 2), {3, 4});
  EXPECT_THROW(ds.link_weight(2, 2), ConfigError);
  EXPECT_THROW(ds.link_weight(0, 5), ConfigError);
}

TEST(Mixing, LayersPassConditioningGuard) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mix = MixingNetwork::random(4, 4, seed);
    for (std::size_t l = 0; l < 3; ++l) EXPECT_GT(min_singular_value(mix.params().get(weight_name("mix", l))), 1e-3);
  }
}

TEST(Mixing, IllConditionedWeightsRejected) {
  ParamStore p;
  for (std::size_t l = 0; l < 3; ++l) {
    p.add(weight_name("mix", l), Matrix::identity(2));
    p.add(bias_name("mix", l), Matrix(1, 2));
  }
  p.set(weight_name("mix", 1), Matrix::from_rows({{1.0, 2.0}, {0.5, 1.0}}));
  EXPECT_THROW(MixingNetwork(2, 2, p), NumericError);
}

TEST(Mixing, IdentityOnNonnegativeLatents) {
  Matrix s = sample_latents({LatentKind::IndependentLaplace, 3, 100}, 2);
  for (double& v : s.data()) v = std::abs(v);
  const auto ds = dataset_from_latents(s, MixingNetwork::identity(3), build_link_model(3, 3, 1), 5);
  EXPECT_EQ(ds.features(), s);
}

TEST(Mixing, InjectiveOnDeskSample) {
  const auto ds = generate_dataset({LatentKind::IndependentLaplace, 4, 2000}, MixingNetwork::random(4, 4, 9),
                                   build_link_model(4, 8, 1), {2, 3});
  double min_d2 = INFINITY;
  const Matrix& x = ds.features();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = i + 1; j < x.rows(); ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) d2 += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
      min_d2 = std::min(min_d2, d2);
    }
  }
  EXPECT_GT(min_d2, 0.0);
}

TEST(Dataset, SameSeedsBitwiseIdentical) {
  const auto make = [] {
    return generate_dataset({LatentKind::CorrelatedGauss, 3, 60}, MixingNetwork::random(3, 5, 1),
                            build_link_model(3, 4, 2), {3, 4});
  };
  const auto a = make(), b = make();
  EXPECT_EQ(a.features(), b.features());
  EXPECT_EQ(a.latents(), b.latents());
  EXPECT_EQ(testing::weight_hash(a), testing::weight_hash(b));
}

TEST(Dataset, DimensionMismatchThrows) {
  EXPECT_THROW(generate_dataset({LatentKind::IndependentLaplace, 3, 10}, MixingNetwork::random(2, 2, 1),
                                build_link_model(3, 2, 1), {1, 2}),
               ShapeError);
}

TEST(Dataset, FileRoundTrip) {
  const auto ds = generate_dataset({LatentKind::IndependentLaplace, 2, 25}, MixingNetwork::random(2, 3, 1),
                                   build_link_model(2, 3, 2), {3, 4});
  std::stringstream buf;
  write_dataset(buf, ds);
  const auto back = read_dataset(buf);
  EXPECT_EQ(back.features(), ds.features());
  EXPECT_EQ(back.latents(), ds.latents());
  EXPECT_EQ(back.link_seed(), ds.link_seed());
  EXPECT_EQ(back.link_model().alpha, ds.link_model().alpha);
  EXPECT_EQ(testing::weight_hash(back), testing::weight_hash(ds));
}

TEST(Dataset, LoaderRejectsBadMagicAndTruncation) {
  const auto ds = generate_dataset({LatentKind::IndependentLaplace, 2, 5}, MixingNetwork::random(2, 2, 1),
                                   build_link_model(2, 3, 2), {3, 4});
  std::stringstream buf;
  write_dataset(buf, ds);
  const std::string bytes = buf.str();
  std::stringstream bad_magic("GCA2" + bytes.substr(4));
  EXPECT_THROW(read_dataset(bad_magic), FormatError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_dataset(truncated), FormatError);
  std::stringstream trailing(bytes + "x");
  EXPECT_THROW(read_dataset(trailing), FormatError);
}

}  // namespace
}  // namespace gca
