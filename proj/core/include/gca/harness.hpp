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

// Experiment orchestration: one run = generate data, train one method,
// evaluate on fresh test latents. Sweeps run the cross product of axis
// values, seeds and methods and aggregate MCC per point.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gca/synthdata.hpp"
#include "gca/training.hpp"

namespace gca {

enum class Method { GCA, EBM };
std::string_view to_string(Method m);
Method parse_method(std::string_view text);

enum class SweepAxis { LatentDim, MaxLinkState };
std::string_view to_string(SweepAxis a);
SweepAxis parse_axis(std::string_view text);

struct ExperimentConfig {
  LatentKind latent = LatentKind::IndependentLaplace;
  std::size_t d_s = 4;
  std::size_t d_x = 4;
  std::size_t K = 8;
  std::size_t n = 2000;
  Method method = Method::GCA;
  TrainConfig train{100, 20000, 1e-4, 0, 100};
  std::size_t n_test = 10000;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "results";
  bool allow_ds_gt_dx = false;

  /// d_s = d_x = 4, n = 2000, 20000 iterations.
  static ExperimentConfig desk();
  /// d_s = d_x = 6, K = 10, n = 10000, 100000 iterations, minibatch 100.
  static ExperimentConfig full();

  /// Throws ConfigError for invalid combinations. Prints a warning to
  /// stderr when d_s > d_x is allowed by the override flag.
  void validate() const;
};

/// Applies one key=value setting. Keys: profile, latent, d_s, d_x, K, n,
/// method, minibatch, iterations, lr, eval_every, n_test, seeds,
/// output_dir, allow_ds_gt_dx.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Line-oriented key=value text; '#' starts a comment.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = ExperimentConfig::desk());
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = ExperimentConfig::desk());
std::string format_config(const ExperimentConfig& cfg);

/// Output directory, overridden by the GCA_OUTPUT_DIR environment variable.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

struct SweepResultRow {
  Method method = Method::GCA;
  LatentKind latent = LatentKind::IndependentLaplace;
  std::size_t d_s = 0;
  std::size_t d_x = 0;
  std::size_t K = 0;
  std::size_t n = 0;
  std::size_t minibatch = 0;
  std::size_t iterations = 0;
  double lr = 0.0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  double mcc = 0.0;
  double loss_final = 0.0;
  double wall_time_s = 0.0;
  std::string error;  // empty on success
};

/// Everything one run derives from (cfg, seed).
struct ExperimentData {
  MixingNetwork mixing;
  GraphDataset train;
  Matrix test_latents;
  Matrix test_features;
};

ExperimentData generate_experiment_data(const ExperimentConfig& cfg, std::uint64_t seed);

/// Generates data, trains cfg.method, and evaluates MCC on n_test fresh
/// latents. Errors are rethrown with the configuration prepended.
SweepResultRow run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

/// Configuration that reproduces a row (other fields from `base`).
ExperimentConfig config_from_row(const SweepResultRow& row, const ExperimentConfig& base);

struct AggregateRow {
  SweepAxis axis = SweepAxis::MaxLinkState;
  std::size_t value = 0;
  Method method = Method::GCA;
  std::size_t count = 0;
  double mcc_mean = 0.0;
  double mcc_std = 0.0;  // sample standard deviation, 0 for a single run
};

/// Mean and standard deviation of successful rows per (value, method).
/// Values are summed in sorted order, so the result does not depend on
/// row order.
std::vector<AggregateRow> aggregate(const std::vector<SweepResultRow>& rows, SweepAxis axis);

struct SweepOptions {
  std::vector<Method> methods{Method::GCA, Method::EBM};
  std::size_t jobs = 1;
  bool write_files = true;
  std::function<void(const SweepResultRow&)> on_row;  // called serially
};

struct SweepOutput {
  std::vector<SweepResultRow> rows;
  std::vector<AggregateRow> aggregate;
  std::filesystem::path rows_csv;
  std::filesystem::path aggregate_csv;
  std::filesystem::path plot_data;
};

/// Runs values x seeds x methods. A failing run is recorded with its error
/// string and the sweep continues.
SweepOutput run_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::size_t>& values,
                      const std::vector<std::uint64_t>& seeds, const SweepOptions& options = {});

void write_rows_csv(std::ostream& out, const std::vector<SweepResultRow>& rows);
std::vector<SweepResultRow> read_rows_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);

/// Tab-separated "x method mean std" with 6 significant digits, sorted by
/// method then x. An empty aggregate yields the header line only.
void emit_plot_data(std::ostream& out, const std::vector<AggregateRow>& aggregate);

}  // namespace gca
