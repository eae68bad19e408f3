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

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gca {

/// Dense row-major matrix of doubles.
///
/// A row vector is a 1 x n matrix and a scalar is 1 x 1. There is no
/// separate vector type: every tensor in the library is a Matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// Builds a matrix from nested rows; all rows must have equal length.
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);
  static Matrix scalar(double v) { return Matrix(1, 1, v); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

// Dense kernels shared by the plain evaluation path and the autodiff tape.
// Every output element is accumulated in a fixed order that does not depend
// on the number of rows, so batched and row-by-row evaluation agree bitwise.

/// out = x * w + bias (bias is 1 x out, broadcast over rows).
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& bias);

/// dx = dy * w^T
Matrix matmul_transpose_b(const Matrix& dy, const Matrix& w);

/// dw += x^T * dy
void accumulate_transpose_a(const Matrix& x, const Matrix& dy, Matrix& dw);

/// Selects rows of `src` in the given order.
Matrix gather_rows(const Matrix& src, std::span<const std::size_t> idx);

/// Stacks a on top of b (equal column counts).
Matrix vstack(const Matrix& a, const Matrix& b);

/// Column means over rows.
std::vector<double> column_means(const Matrix& m);

}  // namespace gca
