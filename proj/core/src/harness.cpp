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

#include "gca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "gca/ebm.hpp"
#include "gca/error.hpp"
#include "gca/estimator.hpp"
#include "gca/eval.hpp"
#include "gca/rng.hpp"

namespace gca {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  T value{};
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || t.empty()) {
    throw ConfigError("invalid value '" + t + "' for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "no") return false;
  throw ConfigError("invalid boolean '" + t + "' for " + std::string(key));
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    if (!trim(item).empty()) seeds.push_back(parse_number<std::uint64_t>("seeds", item));
  }
  return seeds;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double_field(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::nan("");
  return parse_number<double>("csv field", s);
}

constexpr const char* kRowHeader =
    "method,latent,d_s,d_x,K,n,minibatch,iterations,lr,n_test,seed,mcc,loss_final,wall_time_s,error";
constexpr const char* kAggregateHeader = "axis,value,method,count,mcc_mean,mcc_std";

std::string describe(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::ostringstream o;
  o << "method=" << to_string(cfg.method) << " latent=" << to_string(cfg.latent) << " d_s=" << cfg.d_s
    << " d_x=" << cfg.d_x << " K=" << cfg.K << " n=" << cfg.n << " seed=" << seed;
  return o.str();
}

}  // namespace

std::string_view to_string(Method m) { return m == Method::GCA ? "GCA" : "EBM"; }

Method parse_method(std::string_view text) {
  if (text == "GCA" || text == "gca") return Method::GCA;
  if (text == "EBM" || text == "ebm") return Method::EBM;
  throw ConfigError("unknown method '" + std::string(text) + "' (expected GCA or EBM)");
}

std::string_view to_string(SweepAxis a) { return a == SweepAxis::LatentDim ? "latent-dim" : "max-link-state"; }

SweepAxis parse_axis(std::string_view text) {
  if (text == "latent-dim" || text == "LatentDim" || text == "d_s") return SweepAxis::LatentDim;
  if (text == "max-link-state" || text == "MaxLinkState" || text == "K") return SweepAxis::MaxLinkState;
  throw ConfigError("unknown sweep axis '" + std::string(text) + "' (expected latent-dim or max-link-state)");
}

ExperimentConfig ExperimentConfig::desk() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::full() {
  ExperimentConfig cfg;
  cfg.d_s = 6;
  cfg.d_x = 6;
  cfg.K = 10;
  cfg.n = 10000;
  cfg.train.iterations = 100000;
  cfg.train.minibatch_size = 100;
  return cfg;
}

void ExperimentConfig::validate() const {
  if (d_s < 1 || d_x < 1) throw ConfigError("d_s and d_x must be >= 1");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (n < 2) throw ConfigError("n must be >= 2");
  if (n_test < 3) throw ConfigError("n_test must be >= 3");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (d_s > d_x) {
    if (!allow_ds_gt_dx) {
      throw ConfigError("d_s = " + std::to_string(d_s) + " exceeds d_x = " + std::to_string(d_x) +
                        "; set allow_ds_gt_dx to run a non-injective mixing");
    }
    std::cerr << "warning: d_s = " << d_s << " > d_x = " << d_x << ", the mixing network is not injective\n";
  }
  train.validate();
}

void apply_setting(ExperimentConfig& cfg, std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  if (key == "profile") {
    const std::string v = trim(value);
    const auto keep_out = cfg.output_dir;
    if (v == "desk") cfg = ExperimentConfig::desk();
    else if (v == "full") cfg = ExperimentConfig::full();
    else throw ConfigError("unknown profile '" + v + "' (expected desk or full)");
    cfg.output_dir = keep_out;
  } else if (key == "latent") {
    cfg.latent = parse_latent_kind(trim(value));
  } else if (key == "d_s") {
    cfg.d_s = parse_number<std::size_t>(key, value);
  } else if (key == "d_x") {
    cfg.d_x = parse_number<std::size_t>(key, value);
  } else if (key == "K") {
    cfg.K = parse_number<std::size_t>(key, value);
  } else if (key == "n") {
    cfg.n = parse_number<std::size_t>(key, value);
  } else if (key == "method") {
    cfg.method = parse_method(trim(value));
  } else if (key == "minibatch") {
    cfg.train.minibatch_size = parse_number<std::size_t>(key, value);
  } else if (key == "iterations") {
    cfg.train.iterations = parse_number<std::size_t>(key, value);
  } else if (key == "lr") {
    cfg.train.lr = parse_number<double>(key, value);
  } else if (key == "eval_every") {
    cfg.train.eval_every = parse_number<std::size_t>(key, value);
  } else if (key == "n_test") {
    cfg.n_test = parse_number<std::size_t>(key, value);
  } else if (key == "seeds") {
    cfg.seeds = parse_seed_list(value);
  } else if (key == "output_dir") {
    cfg.output_dir = trim(value);
  } else if (key == "allow_ds_gt_dx") {
    cfg.allow_ds_gt_dx = parse_bool(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    try {
      apply_setting(base, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, std::move(base));
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream o;
  o << "latent=" << to_string(cfg.latent) << "\n"
    << "d_s=" << cfg.d_s << "\n"
    << "d_x=" << cfg.d_x << "\n"
    << "K=" << cfg.K << "\n"
    << "n=" << cfg.n << "\n"
    << "method=" << to_string(cfg.method) << "\n"
    << "minibatch=" << cfg.train.minibatch_size << "\n"
    << "iterations=" << cfg.train.iterations << "\n"
    << "lr=" << format_double(cfg.train.lr) << "\n"
    << "eval_every=" << cfg.train.eval_every << "\n"
    << "n_test=" << cfg.n_test << "\n"
    << "seeds=";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) o << (i ? "," : "") << cfg.seeds[i];
  o << "\n"
    << "output_dir=" << cfg.output_dir << "\n"
    << "allow_ds_gt_dx=" << (cfg.allow_ds_gt_dx ? "true" : "false") << "\n";
  return o.str();
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("GCA_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

ExperimentData generate_experiment_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  MixingNetwork mixing = MixingNetwork::random(cfg.d_s, cfg.d_x, stream_seed(seed, "mixing-init"));
  Rng links(seed, "links");
  const std::uint64_t alpha_seed = links();
  const std::uint64_t link_seed = links();
  const LinkModel model = build_link_model(cfg.d_s, cfg.K, alpha_seed);
  GraphDataset train = generate_dataset({cfg.latent, cfg.d_s, cfg.n}, mixing, model,
                                        DatasetSeeds{stream_seed(seed, "latents"), link_seed});
  Matrix test_latents = sample_latents({cfg.latent, cfg.d_s, cfg.n_test}, stream_seed(seed, "test-latents"));
  Matrix test_features = mixing.apply(test_latents);
  return {std::move(mixing), std::move(train), std::move(test_latents), std::move(test_features)};
}

SweepResultRow run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SweepResultRow row;
  row.method = cfg.method;
  row.latent = cfg.latent;
  row.d_s = cfg.d_s;
  row.d_x = cfg.d_x;
  row.K = cfg.K;
  row.n = cfg.n;
  row.minibatch = cfg.train.minibatch_size;
  row.iterations = cfg.train.iterations;
  row.lr = cfg.train.lr;
  row.n_test = cfg.n_test;
  row.seed = seed;
  try {
    cfg.validate();
    const ExperimentData data = generate_experiment_data(cfg, seed);
    TrainConfig train = cfg.train;
    train.seed = seed;
    Matrix h;
    if (cfg.method == Method::GCA) {
      const GcaTrainResult result = train_gca(data.train, train);
      row.loss_final = result.trace.final_loss();
      h = result.model.encoder.encode(data.test_features);
    } else {
      // Link weights are never passed to the baseline.
      const EbmTrainResult result = train_ebm(data.train.features(), cfg.d_s, train);
      row.loss_final = result.trace.final_loss();
      h = result.params.encoder.encode(data.test_features);
    }
    row.mcc = mean_abs_corr(data.test_latents, h).mcc;
  } catch (const Error& e) {
    throw Error(describe(cfg, seed) + ": " + e.what());
  }
  row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

ExperimentConfig config_from_row(const SweepResultRow& row, const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.method = row.method;
  cfg.latent = row.latent;
  cfg.d_s = row.d_s;
  cfg.d_x = row.d_x;
  cfg.K = row.K;
  cfg.n = row.n;
  cfg.train.minibatch_size = row.minibatch;
  cfg.train.iterations = row.iterations;
  cfg.train.lr = row.lr;
  cfg.n_test = row.n_test;
  cfg.seeds = {row.seed};
  cfg.allow_ds_gt_dx = base.allow_ds_gt_dx || row.d_s > row.d_x;
  return cfg;
}

std::vector<AggregateRow> aggregate(const std::vector<SweepResultRow>& rows, SweepAxis axis) {
  std::map<std::pair<std::size_t, int>, std::vector<double>> groups;
  for (const auto& r : rows) {
    if (!r.error.empty() || !std::isfinite(r.mcc)) continue;
    const std::size_t value = axis == SweepAxis::LatentDim ? r.d_s : r.K;
    groups[{value, static_cast<int>(r.method)}].push_back(r.mcc);
  }
  std::vector<AggregateRow> out;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    out.push_back({axis, key.first, static_cast<Method>(key.second), values.size(), mean, sd});
  }
  return out;
}

SweepOutput run_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::size_t>& values,
                      const std::vector<std::uint64_t>& seeds, const SweepOptions& options) {
  if (values.empty()) throw ConfigError("sweep needs at least one axis value");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  if (options.methods.empty()) throw ConfigError("sweep needs at least one method");

  struct Job {
    ExperimentConfig cfg;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t v : values) {
    for (std::uint64_t seed : seeds) {
      for (Method m : options.methods) {
        ExperimentConfig cfg = base;
        cfg.method = m;
        if (axis == SweepAxis::LatentDim) cfg.d_s = v;
        else cfg.K = v;
        jobs.push_back({cfg, seed});
      }
    }
  }

  SweepOutput out;
  out.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex collector;
  auto worker = [&] {
    for (std::size_t idx = next.fetch_add(1); idx < jobs.size(); idx = next.fetch_add(1)) {
      const Job& job = jobs[idx];
      SweepResultRow row;
      try {
        row = run_experiment(job.cfg, job.seed);
      } catch (const std::exception& e) {
        row = SweepResultRow{job.cfg.method, job.cfg.latent, job.cfg.d_s, job.cfg.d_x, job.cfg.K,
                             job.cfg.n, job.cfg.train.minibatch_size, job.cfg.train.iterations, job.cfg.train.lr,
                             job.cfg.n_test, job.seed, std::nan(""), std::nan(""), 0.0, e.what()};
      }
      std::lock_guard<std::mutex> lock(collector);
      out.rows[idx] = row;
      if (options.on_row) options.on_row(row);
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(options.jobs, jobs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  out.aggregate = aggregate(out.rows, axis);
  if (options.write_files) {
    const std::filesystem::path dir = resolve_output_dir(base);
    std::filesystem::create_directories(dir);
    const std::string stem = std::string("sweep_") + std::string(to_string(axis));
    out.rows_csv = dir / (stem + ".csv");
    out.aggregate_csv = dir / (stem + "_aggregate.csv");
    out.plot_data = dir / (stem + "_plot.tsv");
    std::ofstream rows_file(out.rows_csv);
    write_rows_csv(rows_file, out.rows);
    std::ofstream agg_file(out.aggregate_csv);
    write_aggregate_csv(agg_file, out.aggregate);
    std::ofstream plot_file(out.plot_data);
    emit_plot_data(plot_file, out.aggregate);
    if (!rows_file || !agg_file || !plot_file) throw FormatError("failed writing sweep outputs to " + dir.string());
  }
  return out;
}

void write_rows_csv(std::ostream& out, const std::vector<SweepResultRow>& rows) {
  out << kRowHeader << "\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << to_string(r.latent) << ',' << r.d_s << ',' << r.d_x << ',' << r.K << ','
        << r.n << ',' << r.minibatch << ',' << r.iterations << ',' << format_double(r.lr) << ',' << r.n_test << ','
        << r.seed << ',' << format_double(r.mcc) << ',' << format_double(r.loss_final) << ','
        << format_double(r.wall_time_s) << ',' << csv_escape(r.error) << "\n";
  }
}

std::vector<SweepResultRow> read_rows_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kRowHeader) throw FormatError("sweep CSV: missing or wrong header");
  std::vector<SweepResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 15) throw FormatError("sweep CSV line " + std::to_string(lineno) + ": expected 15 fields");
    try {
      SweepResultRow r;
      r.method = parse_method(f[0]);
      r.latent = parse_latent_kind(f[1]);
      r.d_s = parse_number<std::size_t>("d_s", f[2]);
      r.d_x = parse_number<std::size_t>("d_x", f[3]);
      r.K = parse_number<std::size_t>("K", f[4]);
      r.n = parse_number<std::size_t>("n", f[5]);
      r.minibatch = parse_number<std::size_t>("minibatch", f[6]);
      r.iterations = parse_number<std::size_t>("iterations", f[7]);
      r.lr = parse_double_field(f[8]);
      r.n_test = parse_number<std::size_t>("n_test", f[9]);
      r.seed = parse_number<std::uint64_t>("seed", f[10]);
      r.mcc = parse_double_field(f[11]);
      r.loss_final = parse_double_field(f[12]);
      r.wall_time_s = parse_double_field(f[13]);
      r.error = f[14];
      rows.push_back(std::move(r));
    } catch (const ConfigError& e) {
      throw FormatError("sweep CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateHeader << "\n";
  for (const auto& a : rows) {
    out << to_string(a.axis) << ',' << a.value << ',' << to_string(a.method) << ',' << a.count << ','
        << format_double(a.mcc_mean) << ',' << format_double(a.mcc_std) << "\n";
  }
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kAggregateHeader) {
    throw FormatError("aggregate CSV: missing or wrong header");
  }
  std::vector<AggregateRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw FormatError("aggregate CSV: expected 6 fields");
    rows.push_back({parse_axis(f[0]), parse_number<std::size_t>("value", f[1]), parse_method(f[2]),
                    parse_number<std::size_t>("count", f[3]), parse_double_field(f[4]), parse_double_field(f[5])});
  }
  return rows;
}

void emit_plot_data(std::ostream& out, const std::vector<AggregateRow>& aggregate) {
  std::vector<AggregateRow> sorted = aggregate;
  std::stable_sort(sorted.begin(), sorted.end(), [](const AggregateRow& a, const AggregateRow& b) {
    if (a.method != b.method) return static_cast<int>(a.method) < static_cast<int>(b.method);
    return a.value < b.value;
  });
  out << "x\tmethod\tmean\tstd\n";
  char buf[128];
  for (const auto& a : sorted) {
    std::snprintf(buf, sizeof buf, "%zu\t%s\t%.6g\t%.6g\n", a.value, std::string(to_string(a.method)).c_str(),
                  a.mcc_mean, a.mcc_std);
    out << buf;
  }
}

}  // namespace gca
