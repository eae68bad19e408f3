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

#include "gca/matrix.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

#include "gca/error.hpp"

namespace gca {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows in Matrix::from_rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  // Exponent bits all set means inf or NaN.
  constexpr std::uint64_t kExp = 0x7ff0000000000000ULL;
  std::uint64_t bad = 0;
  for (double v : data_) bad |= static_cast<std::uint64_t>((std::bit_cast<std::uint64_t>(v) & kExp) == kExp);
  return bad == 0;
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& bias) {
  if (x.cols() != w.rows() || bias.rows() != 1 || bias.cols() != w.cols()) {
    throw ShapeError("affine: input " + shape_string(x) + ", weight " +
                     shape_string(w) + ", bias " + shape_string(bias));
  }
  const std::size_t n = x.rows(), in = w.rows(), out = w.cols();
  Matrix y(n, out);
  const double* wp = w.data().data();
  const double* bp = bias.data().data();
  for (std::size_t r = 0; r < n; ++r) {
    double* yr = y.row(r).data();
    const double* xr = x.row(r).data();
    for (std::size_t j = 0; j < out; ++j) yr[j] = bp[j];
    for (std::size_t k = 0; k < in; ++k) {
      const double a = xr[k];
      const double* wk = wp + k * out;
      for (std::size_t j = 0; j < out; ++j) yr[j] += a * wk[j];
    }
  }
  return y;
}

Matrix matmul_transpose_b(const Matrix& dy, const Matrix& w) {
  if (dy.cols() != w.cols()) {
    throw ShapeError("matmul_transpose_b: " + shape_string(dy) + " vs " + shape_string(w));
  }
  const std::size_t n = dy.rows(), in = w.rows(), out = w.cols();
  // w^T so the inner loop runs over contiguous k; each dx(r, k) still sums j in order.
  std::vector<double> wt(out * in);
  for (std::size_t k = 0; k < in; ++k) {
    for (std::size_t j = 0; j < out; ++j) wt[j * in + k] = w(k, j);
  }
  Matrix dx(n, in);
  for (std::size_t r = 0; r < n; ++r) {
    const double* g = dy.row(r).data();
    double* d = dx.row(r).data();
    for (std::size_t j = 0; j < out; ++j) {
      const double a = g[j];
      const double* wj = wt.data() + j * in;
      for (std::size_t k = 0; k < in; ++k) d[k] += a * wj[k];
    }
  }
  return dx;
}

void accumulate_transpose_a(const Matrix& x, const Matrix& dy, Matrix& dw) {
  if (x.rows() != dy.rows() || dw.rows() != x.cols() || dw.cols() != dy.cols()) {
    throw ShapeError("accumulate_transpose_a: x " + shape_string(x) + ", dy " +
                     shape_string(dy) + ", dw " + shape_string(dw));
  }
  const std::size_t n = x.rows(), in = x.cols(), out = dy.cols();
  double* dwp = dw.data().data();
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.row(r).data();
    const double* g = dy.row(r).data();
    for (std::size_t k = 0; k < in; ++k) {
      const double a = xr[k];
      if (a == 0.0) continue;
      double* dk = dwp + k * out;
      for (std::size_t j = 0; j < out; ++j) dk[j] += a * g[j];
    }
  }
}

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), src.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= src.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(idx[r]) +
                       " out of range for " + shape_string(src));
    }
    auto s = src.row(idx[r]);
    std::copy(s.begin(), s.end(), out.row(r).begin());
  }
  return out;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("vstack: " + shape_string(a) + " vs " + shape_string(b));
  }
  std::vector<double> data;
  data.reserve(a.size() + b.size());
  data.insert(data.end(), a.data().begin(), a.data().end());
  data.insert(data.end(), b.data().begin(), b.data().end());
  return Matrix(a.rows() + b.rows(), a.cols(), std::move(data));
}

std::vector<double> column_means(const Matrix& m) {
  std::vector<double> mean(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) mean[c] += m(r, c);
  }
  for (double& v : mean) v /= static_cast<double>(m.rows());
  return mean;
}

}  // namespace gca
