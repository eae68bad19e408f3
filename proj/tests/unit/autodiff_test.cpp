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
#include <cstring>
#include <limits>

#include "../common/fd_check.hpp"
#include "gca/adam.hpp"
#include "gca/autodiff.hpp"
#include "gca/error.hpp"
#include "gca/matrix.hpp"
#include "gca/mlp.hpp"
#include "gca/params.hpp"
#include "gca/rng.hpp"

namespace gca {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

TEST(Matrix, AffineMatchesHandComputation) {
  const Matrix x = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix w = Matrix::from_rows({{1, 0, 2}, {-1, 1, 0}});
  const Matrix b = Matrix::from_rows({{0.5, -0.5, 1}});
  const Matrix y = affine(x, w, b);
  EXPECT_EQ(y, Matrix::from_rows({{-0.5, 1.5, 3}, {-0.5, 3.5, 7}}));
}

TEST(Matrix, AffineRejectsShapeMismatch) {
  EXPECT_THROW(affine(Matrix(2, 3), Matrix(2, 2), Matrix(1, 2)), ShapeError);
  EXPECT_THROW(affine(Matrix(2, 2), Matrix(2, 2), Matrix(1, 3)), ShapeError);
}

TEST(Matrix, FromRowsRejectsRaggedRows) { EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), ShapeError); }

TEST(Matrix, VstackAndGather) {
  const Matrix a = Matrix::from_rows({{1, 2}});
  const Matrix b = Matrix::from_rows({{3, 4}, {5, 6}});
  const Matrix s = vstack(a, b);
  EXPECT_EQ(s, Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}}));
  const std::vector<std::size_t> idx{2, 0};
  EXPECT_EQ(gather_rows(s, idx), Matrix::from_rows({{5, 6}, {1, 2}}));
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(gather_rows(s, bad), ShapeError);
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  Rng a(42, "latents"), b(42, "latents"), c(42, "links");
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
  }
}

TEST(Rng, PairKeyIsOrderIndependent) {
  EXPECT_EQ(pair_key(7, 3, 11), pair_key(7, 11, 3));
  EXPECT_NE(pair_key(7, 3, 11), pair_key(8, 3, 11));
  EXPECT_NE(pair_key(7, 3, 11), pair_key(7, 3, 12));
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, UniformMomentsAndNormalMoments) {
  Rng rng(5);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(ParamStore, PackUnpackIsBitwiseIdentity) {
  Rng rng(3);
  ParamStore p;
  p.add("a", random_matrix(3, 4, rng));
  p.add("b", random_matrix(1, 4, rng));
  p.add("c", random_matrix(2, 2, rng));
  EXPECT_EQ(p.size(), 12u + 4u + 4u);
  const ParamStore q = p.unpack(p.pack());
  EXPECT_TRUE(q == p);
  EXPECT_EQ(std::memcmp(q.flat().data(), p.flat().data(), p.size() * sizeof(double)), 0);
  EXPECT_EQ(q.get("b"), p.get("b"));
}

TEST(ParamStore, RejectsDuplicatesAndUnknownNames) {
  ParamStore p;
  p.add("w", Matrix(2, 2));
  EXPECT_THROW(p.add("w", Matrix(1, 1)), ConfigError);
  EXPECT_THROW(p.get("missing"), ShapeError);
  EXPECT_THROW(p.set("w", Matrix(3, 3)), ShapeError);
  const std::vector<double> short_flat(3, 0.0);
  EXPECT_THROW(p.unpack(short_flat), ShapeError);
}

TEST(ParamStore, SubsetKeepsPrefixedTensors) {
  ParamStore p;
  p.add("enc.W0", Matrix(2, 2, 1.0));
  p.add("enc.b0", Matrix(1, 2, 2.0));
  p.add("ratio.beta", Matrix(3, 2, 3.0));
  const ParamStore s = p.subset("enc.");
  EXPECT_EQ(s.entries().size(), 2u);
  EXPECT_FALSE(s.contains("ratio.beta"));
  EXPECT_EQ(s.get("enc.b0"), p.get("enc.b0"));
}

TEST(Autodiff, ConstantObjectiveHasZeroGradient) {
  ParamStore p;
  p.add("theta", Matrix::from_rows({{1.5, -2.0, 3.0}}));
  const ad::Objective f = [](ad::Tape& t, const ad::ParamVars&) { return t.constant(Matrix::scalar(4.2)); };
  const auto g = ad::grad_of_scalar(f, p);
  ASSERT_EQ(g.size(), 3u);
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(Autodiff, LinearObjectiveHasExactGradient) {
  ParamStore p;
  p.add("theta", Matrix::from_rows({{1.5, -2.0, 3.0}}));
  const Matrix c = Matrix::from_rows({{0.25, -7.0, 1e3}});
  const ad::Objective f = [&c](ad::Tape& t, const ad::ParamVars& v) {
    return ad::sum(t, ad::mul(t, v["theta"], t.constant(c)));
  };
  const auto g = ad::grad_of_scalar(f, p);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(g[i], c(0, i));
}

TEST(Autodiff, EveryPrimitiveMatchesFiniteDifferences) {
  Rng rng(11);
  ParamStore p;
  p.add("x", random_matrix(5, 3, rng));
  p.add("w", random_matrix(3, 4, rng));
  p.add("b", random_matrix(1, 4, rng));
  p.add("y", random_matrix(5, 4, rng));
  const ad::Objective f = [](ad::Tape& t, const ad::ParamVars& v) {
    auto h = ad::affine(t, v["x"], v["w"], v["b"]);
    auto a = ad::leaky_relu(t, h, 0.2);
    auto r = ad::relu(t, ad::add(t, h, v["y"]));
    auto m = ad::mul(t, a, ad::sub(t, r, ad::scale(t, v["y"], 0.5)));
    auto rows = ad::row_sum(t, m);
    auto g = ad::gather_rows(t, rows, {4, 0, 0, 2});
    auto sl = ad::slice_rows(t, rows, 1, 3);
    auto e = ad::log(t, ad::add(t, ad::exp(t, ad::scale(t, sl, 0.1)), t.constant(Matrix(2, 1, 1.0))));
    return ad::add(t, ad::add(t, ad::log_mean_exp(t, g), ad::mean(t, e)), ad::scale(t, ad::sum(t, rows), 0.01));
  };
  const auto r = testing::check_gradient(f, p);
  EXPECT_LT(r.max_rel_error, 1e-4) << "worst index " << r.worst_index << " analytic " << r.worst_analytic
                                   << " numeric " << r.worst_numeric;
}

TEST(Autodiff, RandomMlpObjectiveMatchesFiniteDifferences) {
  Rng rng(21);
  const MlpSpec spec{{3, 6, 5, 2}, Activation::leaky_relu(0.2)};
  ParamStore p;
  init_mlp_params(spec, "net", rng, p);
  for (double& v : p.flat()) v += 0.05 * rng.normal();  // nonzero biases
  const Matrix x = random_matrix(7, 3, rng);
  const ad::Objective f = [&](ad::Tape& t, const ad::ParamVars& v) {
    auto out = mlp_forward(t, spec, v, "net", t.constant(x));
    return ad::log_mean_exp(t, ad::row_sum(t, ad::mul(t, out, out)));
  };
  const auto r = testing::check_gradient(f, p);
  EXPECT_LE(p.size(), 500u);
  EXPECT_LT(r.max_rel_error, 1e-4) << "worst index " << r.worst_index;
}

TEST(Autodiff, LogMeanExpIsStableForLargeInputs) {
  ParamStore p;
  p.add("z", Matrix::from_rows({{1000.0}, {1000.0}, {999.0}}));
  const ad::Objective f = [](ad::Tape& t, const ad::ParamVars& v) { return ad::log_mean_exp(t, v["z"]); };
  const auto vg = ad::value_and_grad(f, p);
  const double expected = 1000.0 + std::log((2.0 + std::exp(-1.0)) / 3.0);
  EXPECT_NEAR(vg.value, expected, 1e-12);
  double s = 0;
  for (double g : vg.grad) s += g;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Autodiff, NonFiniteIntermediateNamesTheNode) {
  ParamStore p;
  p.add("theta", Matrix::from_rows({{-1.0}}));
  const ad::Objective f = [](ad::Tape& t, const ad::ParamVars& v) { return ad::log(t, v["theta"]); };
  try {
    ad::grad_of_scalar(f, p);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("log"), std::string::npos) << e.what();
  }
}

TEST(Mlp, LeakyReluIdentityOnNonnegativeInputs) {
  const MlpSpec spec{{3, 3, 3}, Activation::leaky_relu(0.2)};
  ParamStore p;
  p.add(weight_name("m", 0), Matrix::identity(3));
  p.add(bias_name("m", 0), Matrix(1, 3));
  p.add(weight_name("m", 1), Matrix::identity(3));
  p.add(bias_name("m", 1), Matrix(1, 3));
  const Matrix s = Matrix::from_rows({{0.0, 1.5, 2.0}, {3.0, 0.25, 0.0}});
  EXPECT_EQ(mlp_apply(spec, p, "m", s), s);
}

TEST(Mlp, ScalarLeakyReluOfMinusOne) {
  // A hidden layer with weight 1 followed by an identity output layer.
  const MlpSpec spec{{1, 1, 1}, Activation::leaky_relu(0.2)};
  ParamStore p;
  p.add(weight_name("m", 0), Matrix::scalar(1.0));
  p.add(bias_name("m", 0), Matrix::scalar(0.0));
  p.add(weight_name("m", 1), Matrix::scalar(1.0));
  p.add(bias_name("m", 1), Matrix::scalar(0.0));
  EXPECT_DOUBLE_EQ(mlp_apply(spec, p, "m", Matrix::scalar(-1.0))(0, 0), -0.2);
}

TEST(Mlp, BatchEvaluationEqualsPerRowBitwise) {
  Rng rng(8);
  const MlpSpec spec{{4, 7, 3}, Activation::relu()};
  ParamStore p;
  init_mlp_params(spec, "m", rng, p);
  for (double& v : p.flat()) v += 0.1 * rng.normal();
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix batch = mlp_apply(spec, p, "m", x);
  for (std::size_t r = 0; r < 3; ++r) {
    Matrix one(1, 4);
    std::copy(x.row(r).begin(), x.row(r).end(), one.row(0).begin());
    const Matrix y = mlp_apply(spec, p, "m", one);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(y(0, c), batch(r, c));
  }
}

TEST(Mlp, TapeForwardEqualsMlpApplyBitwise) {
  Rng rng(9);
  const MlpSpec spec{{2, 5, 5, 2}, Activation::relu()};
  ParamStore p;
  init_mlp_params(spec, "m", rng, p);
  const Matrix x = random_matrix(6, 2, rng);
  ad::Tape tape;
  ad::ParamVars vars(tape, p);
  const auto out = mlp_forward(tape, spec, vars, "m", tape.constant(x));
  EXPECT_EQ(tape.value(out), mlp_apply(spec, p, "m", x));
}

TEST(Mlp, ShapeErrorNamesTheLayer) {
  const MlpSpec spec{{2, 3, 1}, Activation::relu()};
  ParamStore p;
  p.add(weight_name("m", 0), Matrix(2, 3));
  p.add(bias_name("m", 0), Matrix(1, 3));
  p.add(weight_name("m", 1), Matrix(4, 1));
  p.add(bias_name("m", 1), Matrix(1, 1));
  try {
    mlp_apply(spec, p, "m", Matrix(1, 2));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(mlp_apply(spec, p, "m", Matrix(1, 3)), ShapeError);
}

TEST(Mlp, SpecValidation) {
  EXPECT_THROW((MlpSpec{{3}, Activation::relu()}.validate()), ConfigError);
  EXPECT_THROW((MlpSpec{{3, 0, 1}, Activation::relu()}.validate()), ConfigError);
  EXPECT_THROW((MlpSpec{{3, 2}, Activation::leaky_relu(1.0)}.validate()), ConfigError);
  EXPECT_THROW((MlpSpec{{3, 2}, Activation::leaky_relu(0.0)}.validate()), ConfigError);
  EXPECT_NO_THROW((MlpSpec{{3, 2}, Activation::leaky_relu(0.2)}.validate()));
}

TEST(Mlp, GlorotInitWithinBoundsAndZeroBias) {
  Rng rng(2);
  const MlpSpec spec{{10, 30}, Activation::none()};
  ParamStore p;
  init_mlp_params(spec, "m", rng, p);
  const double a = std::sqrt(6.0 / 40.0);
  for (double v : p.view(weight_name("m", 0))) {
    EXPECT_LE(std::abs(v), a);
  }
  for (double v : p.view(bias_name("m", 0))) EXPECT_EQ(v, 0.0);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  ParamStore p;
  p.add("theta", Matrix::from_rows({{1.0, -2.0, 3.0}}));
  const ParamStore before = p;
  AdamState s(3, AdamHyper{});
  const std::vector<double> g(3, 0.0);
  adam_step(s, p, g);
  EXPECT_TRUE(p == before);
  EXPECT_EQ(s.t, 1u);
}

TEST(Adam, FirstStepMatchesHandRecurrence) {
  ParamStore p;
  p.add("theta", Matrix::from_rows({{1.0, -2.0, 3.0, 0.5}}));
  const std::vector<double> theta0 = p.pack();
  const AdamHyper h{1e-3, 0.9, 0.999, 1e-8};
  AdamState s(4, h);
  const std::vector<double> g{0.5, -3.0, 1e-3, 20.0};
  adam_step(s, p, g);
  for (std::size_t i = 0; i < 4; ++i) {
    // m_hat = g, v_hat = g^2 at t = 1.
    const double expected = -h.lr * g[i] / (std::abs(g[i]) + h.eps);
    const double delta = p.flat()[i] - theta0[i];
    EXPECT_NEAR(delta, expected, 1e-15);
    EXPECT_NEAR(delta, -h.lr * (g[i] > 0 ? 1.0 : -1.0), 1e-8);
    EXPECT_GE(s.v[i], 0.0);
  }
}

TEST(Adam, TrajectoryIsDeterministic) {
  auto run = [] {
    ParamStore p;
    p.add("theta", Matrix::from_rows({{1.0, -2.0}}));
    AdamState s(2, AdamHyper{});
    const std::vector<double> g{0.3, -0.7};
    for (int i = 0; i < 10; ++i) adam_step(s, p, g);
    return p.pack();
  };
  EXPECT_EQ(run(), run());
}

TEST(Adam, LengthMismatchThrows) {
  ParamStore p;
  p.add("theta", Matrix(1, 3));
  AdamState s(3, AdamHyper{});
  const std::vector<double> g(2, 0.0);
  EXPECT_THROW(adam_step(s, p, g), ShapeError);
}

}  // namespace
}  // namespace gca
