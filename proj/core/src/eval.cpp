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

#include "gca/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gca/error.hpp"
#include "gca/hungarian.hpp"

namespace gca {

namespace {

// Centered and unit-norm columns, so correlations are plain dot products.
Matrix standardize(const Matrix& m, const char* which) {
  const std::vector<double> mean = column_means(m);
  Matrix z(m.rows(), m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double ss = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const double d = m(r, c) - mean[c];
      z(r, c) = d;
      ss += d * d;
    }
    if (!(ss > 0.0) || !std::isfinite(ss)) {
      throw NumericError(std::string(which) + " column " + std::to_string(c) + " has zero variance");
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (std::size_t r = 0; r < m.rows(); ++r) z(r, c) *= inv;
  }
  return z;
}

}  // namespace

Matrix correlation_matrix(const Matrix& S, const Matrix& H) {
  if (S.rows() != H.rows() || S.cols() != H.cols()) {
    throw ShapeError("correlation_matrix: S is " + shape_string(S) + ", H is " + shape_string(H));
  }
  if (S.rows() < 3) throw ConfigError("correlation_matrix needs at least 3 samples");
  if (!S.all_finite() || !H.all_finite()) throw NumericError("correlation_matrix: non-finite input");
  const Matrix zs = standardize(S, "S");
  const Matrix zh = standardize(H, "H");
  const std::size_t d = S.cols();
  Matrix c(d, d);
  for (std::size_t r = 0; r < S.rows(); ++r) {
    auto a = zs.row(r);
    auto b = zh.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) c(i, j) += a[i] * b[j];
    }
  }
  for (double& v : c.data()) v = std::clamp(v, -1.0, 1.0);
  return c;
}

EvalReport mean_abs_corr(const Matrix& S, const Matrix& H) {
  Matrix abs_corr = correlation_matrix(S, H);
  for (double& v : abs_corr.data()) v = std::abs(v);
  const Assignment a = solve_max_assignment(abs_corr);
  EvalReport report;
  report.assignment = a.row_to_col;
  report.n_test = S.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < abs_corr.rows(); ++i) {
    const double v = abs_corr(i, a.row_to_col[i]);
    report.per_component_abs_corr.push_back(v);
    total += v;
  }
  report.mcc = total / static_cast<double>(abs_corr.rows());
  return report;
}

}  // namespace gca
