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
#include <vector>

#include "gca/matrix.hpp"

namespace gca {

/// Mean absolute correlation between true latents and estimated features
/// after matching components.
struct EvalReport {
  double mcc = 0.0;
  std::vector<std::size_t> assignment;  // true component i <-> estimated component assignment[i]
  std::vector<double> per_component_abs_corr;
  std::size_t n_test = 0;
};

/// d x d matrix whose (i, j) entry is the Pearson correlation of column i
/// of S with column j of H. Requires n >= 3 rows and no constant column;
/// otherwise throws (NumericError names the constant column).
Matrix correlation_matrix(const Matrix& S, const Matrix& H);

/// Matches components by maximizing the total |correlation| (Hungarian
/// method) and averages the matched values.
EvalReport mean_abs_corr(const Matrix& S, const Matrix& H);

}  // namespace gca
