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

// Numeric check of the identifiability conditions for a link model whose
// log-conditional is a sum of per-coordinate terms q_i(w, s_i, s'_i).
//
// For a baseline state wb, the d-vector of state w collects the mixed
// second derivatives d^2/ds_i ds'_i [q_i(w, .) - q_i(wb, .)]. The
// conditions require K >= d_s and d_s states whose d-vectors have only
// nonzero entries and are linearly independent. For the bilinear model
// q_i = alpha[w][i] s_i s'_i the d-vector is alpha^w - alpha^wb, constant
// in (s, s').

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gca/matrix.hpp"
#include "gca/synthdata.hpp"

namespace gca {

enum class Evidence {
  Exact,    // d-vectors are constant; the result holds for all (s, s')
  Sampled,  // checked at finitely many probe points only
};

struct ConditionReport {
  std::size_t d_s = 0;
  std::size_t K = 0;
  bool d2_ok = false;          // K >= d_s
  std::size_t d3_rank = 0;     // rank of the usable d-vectors at baseline_state
  bool d3_ok = false;          // d_s independent, all-nonzero d-vectors exist
  int baseline_state = 1;      // 1-based
  bool nonzero_ok = false;     // at least d_s candidate d-vectors have no zero entry
  double margin = 0.0;         // d_s-th singular value of the usable d-vectors (0 if fewer)
  std::vector<int> usable_states;  // states (1-based) whose d-vectors enter the rank test
  Evidence evidence = Evidence::Exact;
};

/// Relative threshold for numeric rank: singular values above
/// kRankTolerance * max singular value count.
inline constexpr double kRankTolerance = 1e-9;

/// Entries at or below this magnitude count as zero in the nonzero test.
inline constexpr double kZeroTolerance = 1e-12;

/// alpha^w - alpha^wb. States are 1-based; throws ConfigError outside {1..K}.
std::vector<double> d_vector(const LinkModel& model, int w, int baseline);

/// Singular values in decreasing order.
std::vector<double> singular_values(const Matrix& m);

/// Number of singular values above kRankTolerance times the largest.
std::size_t numeric_rank(const Matrix& m);

/// Rows are d_vector(model, w, baseline) for every w != baseline whose
/// entries are all nonzero; `states` receives the corresponding w.
Matrix usable_d_vectors(const LinkModel& model, int baseline, std::vector<int>* states = nullptr);

/// Tries every baseline and keeps the one with the highest rank, then the
/// largest margin.
ConditionReport check_identifiability(const LinkModel& model);

/// Mixed second derivatives (d^2 q_i / ds_i ds'_i)_i for state w at (s, s').
using CrossDerivative =
    std::function<std::vector<double>(int w, std::span<const double> s, std::span<const double> s_prime)>;

/// Check for a user-supplied (not necessarily bilinear) model. The
/// conditions are tested at each probe s with s' fixed to `s_bar`; a state
/// is usable only if its d-vector is all-nonzero at every probe, and the
/// rank must reach d_s at every probe. The result is labelled Sampled.
ConditionReport check_identifiability_sampled(const CrossDerivative& cross, std::size_t d_s, std::size_t K,
                                              std::span<const std::vector<double>> probes,
                                              std::span<const double> s_bar);

/// key: value lines.
std::string format_report(const ConditionReport& report);

}  // namespace gca
