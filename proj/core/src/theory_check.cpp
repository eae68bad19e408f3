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

#include "gca/theory_check.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gca/error.hpp"

namespace gca {

namespace {

void check_state(int w, std::size_t K) {
  if (w < 1 || static_cast<std::size_t>(w) > K) {
    throw ConfigError("link state " + std::to_string(w) + " outside {1.." + std::to_string(K) + "}");
  }
}

bool all_nonzero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::abs(x) > kZeroTolerance; });
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

Matrix stack_rows(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  return m;
}

// d_s-th singular value, 0 when there are fewer than d_s rows.
double margin_of(const Matrix& m, std::size_t d_s) {
  const std::vector<double> sv = singular_values(m);
  return sv.size() >= d_s && d_s > 0 ? sv[d_s - 1] : 0.0;
}

ConditionReport check_core(const CrossDerivative& cross, std::size_t d_s, std::size_t K,
                           std::span<const std::vector<double>> probes, std::span<const double> s_bar,
                           Evidence evidence) {
  if (d_s < 1 || K < 1) throw ConfigError("d_s and K must be >= 1");
  if (probes.empty()) throw ConfigError("at least one probe point is required");
  for (const auto& p : probes) {
    if (p.size() != d_s) throw ShapeError("probe points must have length d_s");
  }
  if (s_bar.size() != d_s) throw ShapeError("s_bar must have length d_s");

  // cache[probe][w-1] = cross(w, probe, s_bar)
  std::vector<std::vector<std::vector<double>>> cache(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    for (std::size_t w = 1; w <= K; ++w) {
      auto v = cross(static_cast<int>(w), probes[p], s_bar);
      if (v.size() != d_s) throw ShapeError("cross derivative must return d_s values");
      cache[p].push_back(std::move(v));
    }
  }

  ConditionReport best;
  best.d_s = d_s;
  best.K = K;
  best.d2_ok = K >= d_s;
  best.evidence = evidence;
  bool have_best = false;
  for (std::size_t b = 1; b <= K; ++b) {
    std::vector<int> usable;
    for (std::size_t w = 1; w <= K; ++w) {
      if (w == b) continue;
      bool ok = true;
      for (std::size_t p = 0; p < probes.size() && ok; ++p) ok = all_nonzero(difference(cache[p][w - 1], cache[p][b - 1]));
      if (ok) usable.push_back(static_cast<int>(w));
    }
    std::size_t rank = d_s;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < probes.size(); ++p) {
      std::vector<std::vector<double>> rows;
      for (int w : usable) rows.push_back(difference(cache[p][static_cast<std::size_t>(w) - 1], cache[p][b - 1]));
      const Matrix m = stack_rows(rows, d_s);
      rank = std::min(rank, numeric_rank(m));
      margin = std::min(margin, margin_of(m, d_s));
    }
    const bool better = !have_best || rank > best.d3_rank || (rank == best.d3_rank && margin > best.margin);
    if (better) {
      have_best = true;
      best.d3_rank = rank;
      best.margin = margin;
      best.baseline_state = static_cast<int>(b);
      best.usable_states = usable;
      best.nonzero_ok = usable.size() >= d_s;
    }
  }
  best.d3_ok = best.d3_rank == d_s && best.nonzero_ok;
  return best;
}

}  // namespace

std::vector<double> d_vector(const LinkModel& model, int w, int baseline) {
  model.validate();
  check_state(w, model.K);
  check_state(baseline, model.K);
  return difference(model.alpha.row(static_cast<std::size_t>(w - 1)),
                    model.alpha.row(static_cast<std::size_t>(baseline - 1)));
}

std::vector<double> singular_values(const Matrix& m) {
  if (m.empty()) return {};
  Eigen::MatrixXd e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
  const auto& sv = svd.singularValues();
  return std::vector<double>(sv.data(), sv.data() + sv.size());
}

std::size_t numeric_rank(const Matrix& m) {
  const std::vector<double> sv = singular_values(m);
  if (sv.empty() || !(sv.front() > 0.0)) return 0;
  const double threshold = kRankTolerance * sv.front();
  return static_cast<std::size_t>(std::count_if(sv.begin(), sv.end(), [&](double s) { return s > threshold; }));
}

Matrix usable_d_vectors(const LinkModel& model, int baseline, std::vector<int>* states) {
  model.validate();
  check_state(baseline, model.K);
  std::vector<std::vector<double>> rows;
  if (states) states->clear();
  for (std::size_t w = 1; w <= model.K; ++w) {
    if (static_cast<int>(w) == baseline) continue;
    auto d = d_vector(model, static_cast<int>(w), baseline);
    if (!all_nonzero(d)) continue;
    rows.push_back(std::move(d));
    if (states) states->push_back(static_cast<int>(w));
  }
  return stack_rows(rows, model.d_s());
}

ConditionReport check_identifiability(const LinkModel& model) {
  model.validate();
  // Bilinear q: the mixed derivative of alpha s s' is alpha, at every point.
  const CrossDerivative cross = [&model](int w, std::span<const double>, std::span<const double>) {
    auto row = model.alpha.row(static_cast<std::size_t>(w - 1));
    return std::vector<double>(row.begin(), row.end());
  };
  const std::vector<std::vector<double>> probe{std::vector<double>(model.d_s(), 0.0)};
  const std::vector<double> s_bar(model.d_s(), 0.0);
  return check_core(cross, model.d_s(), model.K, probe, s_bar, Evidence::Exact);
}

ConditionReport check_identifiability_sampled(const CrossDerivative& cross, std::size_t d_s, std::size_t K,
                                              std::span<const std::vector<double>> probes,
                                              std::span<const double> s_bar) {
  return check_core(cross, d_s, K, probes, s_bar, Evidence::Sampled);
}

std::string format_report(const ConditionReport& r) {
  std::ostringstream out;
  out.precision(6);
  out << "d_s: " << r.d_s << "\n"
      << "K: " << r.K << "\n"
      << "d2_ok: " << (r.d2_ok ? "true" : "false") << "\n"
      << "d3_rank: " << r.d3_rank << "\n"
      << "d3_ok: " << (r.d3_ok ? "true" : "false") << "\n"
      << "baseline_state: " << r.baseline_state << "\n"
      << "nonzero_ok: " << (r.nonzero_ok ? "true" : "false") << "\n"
      << "margin: " << r.margin << "\n"
      << "usable_states:";
  for (int w : r.usable_states) out << " " << w;
  out << "\n"
      << "evidence: " << (r.evidence == Evidence::Exact ? "exact" : "sampled evidence") << "\n";
  return out.str();
}

}  // namespace gca
