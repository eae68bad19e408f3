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

struct Assignment {
  std::vector<std::size_t> row_to_col;  // row i is matched with column row_to_col[i]
  double total = 0.0;                   // sum of the matched entries
};

/// Square linear assignment minimizing the total cost (Kuhn-Munkres with
/// potentials, O(n^3)).
Assignment solve_min_assignment(const Matrix& cost);

/// Square linear assignment maximizing the total score.
Assignment solve_max_assignment(const Matrix& score);

}  // namespace gca
