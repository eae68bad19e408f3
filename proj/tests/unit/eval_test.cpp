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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "../common/oracles.hpp"
#include "gca/error.hpp"
#include "gca/eval.hpp"
#include "gca/hungarian.hpp"
#include "gca/rng.hpp"

namespace gca {
namespace {

Matrix normal_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

TEST(Correlation, IdentityForEqualInputs) {
  const Matrix S = normal_matrix(500, 4, 1);
  const Matrix C = correlation_matrix(S, S);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(C(i, i), 1.0, 1e-12);
}

TEST(Correlation, AffineMapFlipsSign) {
  const Matrix S = normal_matrix(500, 3, 2);
  Matrix H = S;
  for (double& v : H.data()) v = -2.0 * v + 7.0;
  const Matrix C = correlation_matrix(S, H);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(C(i, i), -1.0, 1e-12);
}

TEST(Correlation, IndependentNormalsNearZero) {
  const Matrix S = normal_matrix(100000, 3, 3), H = normal_matrix(100000, 3, 4);
  const Matrix C = correlation_matrix(S, H);
  double worst = 0.0;
  for (double v : C.data()) worst = std::max(worst, std::abs(v));
  EXPECT_LT(worst, 0.02);
}

TEST(Correlation, ZeroVarianceColumnIsNamed) {
  const Matrix S = normal_matrix(50, 3, 5);
  Matrix H = normal_matrix(50, 3, 6);
  for (std::size_t r = 0; r < 50; ++r) H(r, 2) = 1.5;
  try {
    correlation_matrix(S, H);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos) << e.what();
  }
}

TEST(Correlation, RejectsTooFewSamplesAndShapeMismatch) {
  EXPECT_THROW(correlation_matrix(normal_matrix(2, 2, 1), normal_matrix(2, 2, 2)), ConfigError);
  EXPECT_THROW(correlation_matrix(normal_matrix(10, 2, 1), normal_matrix(10, 3, 2)), ShapeError);
}

TEST(Mcc, PermutedScaledLatentsScoreOne) {
  const Matrix S = normal_matrix(2000, 5, 7);
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  const std::vector<double> scale{2.0, -0.5, 3.0, -7.0, 0.01}, shift{1.0, -2.0, 0.0, 5.0, 9.0};
  Matrix H(2000, 5);
  for (std::size_t r = 0; r < 2000; ++r) {
    for (std::size_t c = 0; c < 5; ++c) H(r, c) = scale[c] * S(r, perm[c]) + shift[c];
  }
  const EvalReport rep = mean_abs_corr(S, H);
  EXPECT_NEAR(rep.mcc, 1.0, 1e-12);
  for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(rep.assignment[perm[c]], c);
  EXPECT_EQ(rep.n_test, 2000u);
}

TEST(Mcc, IndependentFeaturesScoreLow) {
  const EvalReport rep = mean_abs_corr(normal_matrix(10000, 4, 8), normal_matrix(10000, 4, 9));
  EXPECT_LT(rep.mcc, 0.05);
}

TEST(Mcc, InvariantUnderPermutationAndAffineMaps) {
  const Matrix S = normal_matrix(1000, 4, 10);
  Matrix H = normal_matrix(1000, 4, 11);
  for (std::size_t r = 0; r < 1000; ++r) {
    for (std::size_t c = 0; c < 4; ++c) H(r, c) += 0.8 * S(r, c) * S(r, c) + 0.5 * S(r, (c + 1) % 4);
  }
  const double base = mean_abs_corr(S, H).mcc;
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    std::vector<std::size_t> perm(4);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    Matrix G(1000, 4);
    for (std::size_t c = 0; c < 4; ++c) {
      double a = 0.0;
      while (std::abs(a) < 0.1) a = 4.0 * rng.uniform() - 2.0;
      const double b = 10.0 * rng.normal();
      for (std::size_t r = 0; r < 1000; ++r) G(r, c) = a * H(r, perm[c]) + b;
    }
    EXPECT_NEAR(mean_abs_corr(S, G).mcc, base, 1e-12);
  }
}

TEST(Mcc, ReportIsConsistent) {
  const Matrix S = normal_matrix(300, 4, 13), H = normal_matrix(300, 4, 14);
  const EvalReport rep = mean_abs_corr(S, H);
  std::set<std::size_t> seen(rep.assignment.begin(), rep.assignment.end());
  EXPECT_EQ(seen.size(), 4u);
  EXPECT_LT(*seen.rbegin(), 4u);
  const Matrix C = correlation_matrix(S, H);
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(rep.per_component_abs_corr[i], std::abs(C(i, rep.assignment[i])));
    EXPECT_GE(rep.per_component_abs_corr[i], 0.0);
    EXPECT_LE(rep.per_component_abs_corr[i], 1.0);
    sum += rep.per_component_abs_corr[i];
  }
  EXPECT_NEAR(rep.mcc, sum / 4.0, 1e-15);
}

TEST(Hungarian, TwoByTwoExample) {
  const Assignment a = solve_max_assignment(Matrix::from_rows({{0.9, 0.1}, {0.8, 0.2}}));
  EXPECT_EQ(a.row_to_col, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(a.total / 2.0, 0.55, 1e-15);
}

TEST(Hungarian, MatchesBruteForce) {
  Rng rng(15);
  for (std::size_t d = 1; d <= 6; ++d) {
    for (int t = 0; t < 30; ++t) {
      Matrix m(d, d);
      for (double& v : m.data()) v = rng.uniform();
      const Assignment a = solve_max_assignment(m);
      double total = 0.0;
      for (std::size_t i = 0; i < d; ++i) total += m(i, a.row_to_col[i]);
      EXPECT_NEAR(total, a.total, 1e-12);
      EXPECT_NEAR(a.total, testing::brute_force_max_assignment(m), 1e-12) << "d=" << d;
    }
  }
}

TEST(Hungarian, MinAssignmentOnTies) {
  const Assignment a = solve_min_assignment(Matrix(3, 3, 1.0));
  EXPECT_DOUBLE_EQ(a.total, 3.0);
  std::set<std::size_t> cols(a.row_to_col.begin(), a.row_to_col.end());
  EXPECT_EQ(cols.size(), 3u);
}

TEST(Hungarian, RejectsNonSquare) { EXPECT_THROW(solve_max_assignment(Matrix(2, 3)), ShapeError); }

}  // namespace
}  // namespace gca
