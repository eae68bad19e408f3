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

// Command line front end: generate, train-gca, train-ebm, eval, sweep,
// check-identifiability.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gca/ebm.hpp"
#include "gca/error.hpp"
#include "gca/estimator.hpp"
#include "gca/eval.hpp"
#include "gca/harness.hpp"
#include "gca/rng.hpp"
#include "gca/theory_check.hpp"

namespace fs = std::filesystem;

namespace {

// Flags that mirror ExperimentConfig. Values are kept as strings so that
// only flags given on the command line override the config file.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::string profile, latent, d_s, d_x, K, n, method, minibatch, iterations, lr, eval_every, n_test, seeds,
      output_dir;
  bool allow_ds_gt_dx = false;

  void attach(CLI::App& app, bool with_method) {
    app.add_option("--config", config_file, "key=value config file");
    app.add_option("--profile", profile, "desk or full");
    app.add_option("--latent", latent, "laplace or gauss");
    app.add_option("--d-s", d_s, "latent dimension");
    app.add_option("--d-x", d_x, "observed dimension");
    app.add_option("-K,--max-link-state", K, "number of link states");
    app.add_option("-n,--nodes", n, "number of nodes");
    if (with_method) app.add_option("--method", method, "GCA or EBM");
    app.add_option("--minibatch", minibatch, "pairs per iteration");
    app.add_option("--iterations", iterations, "Adam iterations");
    app.add_option("--lr", lr, "learning rate");
    app.add_option("--eval-every", eval_every, "loss trace interval");
    app.add_option("--n-test", n_test, "test latents for evaluation");
    app.add_option("--seeds", seeds, "comma separated seeds");
    app.add_option("-o,--output-dir", output_dir, "output directory (GCA_OUTPUT_DIR overrides)");
    app.add_flag("--allow-ds-gt-dx", allow_ds_gt_dx, "permit d_s > d_x");
    app.add_option("--set", sets, "extra key=value setting")->take_all();
  }

  gca::ExperimentConfig resolve() const {
    gca::ExperimentConfig cfg;
    if (!profile.empty()) gca::apply_setting(cfg, "profile", profile);
    if (!config_file.empty()) cfg = gca::load_config(config_file, cfg);
    const std::pair<const char*, const std::string*> fields[] = {
        {"latent", &latent},         {"d_s", &d_s},       {"d_x", &d_x},         {"K", &K},
        {"n", &n},                   {"method", &method}, {"minibatch", &minibatch},
        {"iterations", &iterations}, {"lr", &lr},         {"eval_every", &eval_every},
        {"n_test", &n_test},         {"seeds", &seeds},   {"output_dir", &output_dir},
    };
    for (const auto& [key, value] : fields) {
      if (!value->empty()) gca::apply_setting(cfg, key, *value);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw gca::ConfigError("--set expects key=value, got '" + s + "'");
      gca::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (allow_ds_gt_dx) cfg.allow_ds_gt_dx = true;
    cfg.validate();
    return cfg;
  }
};

std::vector<std::size_t> parse_values(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const auto v = std::stoull(item, &pos);
    if (pos != item.size()) throw gca::ConfigError("invalid sweep value '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

fs::path out_path(const gca::ExperimentConfig& cfg, const std::string& name) {
  const fs::path p(name);
  if (p.is_absolute() || p.has_parent_path()) return p;
  const fs::path dir = gca::resolve_output_dir(cfg);
  fs::create_directories(dir);
  return dir / p;
}

std::string read_magic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char m[4] = {};
  if (!in.read(m, 4)) throw gca::FormatError("cannot read " + path.string());
  return std::string(m, 4);
}

void print_trace(const gca::LossTrace& trace) {
  for (const auto& p : trace.points) std::printf("iteration %zu loss %.6g\n", p.iteration, p.loss);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph component analysis: data generation, training, evaluation and sweeps"};
  app.require_subcommand(1);

  ConfigFlags gen_flags;
  std::string gen_out = "train.gca1", gen_test_out;
  auto* gen = app.add_subcommand("generate", "generate a graph dataset");
  gen_flags.attach(*gen, false);
  gen->add_option("--out", gen_out, "training dataset file; a bare name goes into the output directory");
  gen->add_option("--test-out", gen_test_out, "optional test dataset from the same mixing; placed like --out");

  ConfigFlags gca_flags;
  std::string gca_data, gca_out = "model.gcam";
  auto* tgca = app.add_subcommand("train-gca", "train the GCA density-ratio estimator");
  gca_flags.attach(*tgca, false);
  tgca->add_option("--data", gca_data, "dataset file")->required();
  tgca->add_option("--out", gca_out, "checkpoint file; a bare name goes into the output directory");

  ConfigFlags ebm_flags;
  std::string ebm_data, ebm_out = "model.ebmm";
  auto* tebm = app.add_subcommand("train-ebm", "train the EBM baseline (features only)");
  ebm_flags.attach(*tebm, false);
  tebm->add_option("--data", ebm_data, "dataset file")->required();
  tebm->add_option("--out", ebm_out, "checkpoint file; a bare name goes into the output directory");

  std::string eval_model, eval_data;
  auto* ev = app.add_subcommand("eval", "MCC of a checkpoint against a dataset's true latents");
  ev->add_option("--model", eval_model, "GCA or EBM checkpoint")->required();
  ev->add_option("--data", eval_data, "dataset file")->required();

  ConfigFlags sweep_flags;
  std::string sweep_axis, sweep_values, sweep_methods = "GCA,EBM";
  std::size_t sweep_jobs = 1;
  auto* sw = app.add_subcommand("sweep", "sweep d_s or K over seeds and both methods");
  sweep_flags.attach(*sw, false);
  sw->add_option("--axis", sweep_axis, "latent-dim or max-link-state")->required();
  sw->add_option("--values", sweep_values, "comma separated axis values")->required();
  sw->add_option("--methods", sweep_methods, "comma separated methods");
  sw->add_option("-j,--jobs", sweep_jobs, "worker threads");

  std::size_t id_ds = 0, id_K = 0;
  std::uint64_t id_seed = 0;
  auto* idc = app.add_subcommand("check-identifiability", "check the identifiability conditions for a link model");
  idc->add_option("--d-s", id_ds, "latent dimension")->required();
  idc->add_option("-K,--max-link-state", id_K, "number of link states")->required();
  idc->add_option("--seed", id_seed, "root seed of the link model");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto cfg = gen_flags.resolve();
      const auto seed = cfg.seeds.front();
      auto data = gca::generate_experiment_data(cfg, seed);
      const auto train_path = out_path(cfg, gen_out);
      gca::save_dataset(train_path, data.train);
      std::printf("wrote %s (n=%zu, d_x=%zu, d_s=%zu, K=%zu)\n", train_path.string().c_str(), data.train.n(),
                  data.train.d_x(), data.train.d_s(), data.train.K());
      if (!gen_test_out.empty()) {
        const auto test = gca::dataset_from_latents(data.test_latents, data.mixing, data.train.link_model(),
                                                    data.train.link_seed());
        const auto test_path = out_path(cfg, gen_test_out);
        gca::save_dataset(test_path, test);
        std::printf("wrote %s (n=%zu)\n", test_path.string().c_str(), test.n());
      }
    } else if (*tgca) {
      auto cfg = gca_flags.resolve();
      const auto ds = gca::load_dataset(gca_data);
      cfg.train.seed = cfg.seeds.front();
      const auto result = gca::train_gca(ds, cfg.train);
      print_trace(result.trace);
      const auto path = out_path(cfg, gca_out);
      gca::save_gca_checkpoint(path, result.model);
      std::printf("wrote %s\n", path.string().c_str());
    } else if (*tebm) {
      auto cfg = ebm_flags.resolve();
      const auto ds = gca::load_dataset(ebm_data);
      cfg.train.seed = cfg.seeds.front();
      const auto result = gca::train_ebm(ds.features(), ds.d_s(), cfg.train);
      print_trace(result.trace);
      const auto path = out_path(cfg, ebm_out);
      gca::save_ebm_checkpoint(path, result.params);
      std::printf("wrote %s\n", path.string().c_str());
    } else if (*ev) {
      const auto ds = gca::load_dataset(eval_data);
      const std::string magic = read_magic(eval_model);
      gca::Matrix h;
      if (magic == "GCAM") {
        h = gca::load_gca_checkpoint(eval_model).encoder.encode(ds.features());
      } else if (magic == "EBMM") {
        h = gca::load_ebm_checkpoint(eval_model).encoder.encode(ds.features());
      } else {
        throw gca::FormatError(eval_model + ": unknown checkpoint format");
      }
      const auto report = gca::mean_abs_corr(ds.latents(), h);
      std::printf("mcc: %.6f\nn_test: %zu\nassignment:", report.mcc, report.n_test);
      for (auto c : report.assignment) std::printf(" %zu", c + 1);
      std::printf("\nper_component_abs_corr:");
      for (double v : report.per_component_abs_corr) std::printf(" %.6f", v);
      std::printf("\n");
    } else if (*sw) {
      const auto axis = gca::parse_axis(sweep_axis);
      auto base = sweep_flags.resolve();
      const auto values = parse_values(sweep_values);
      if (axis == gca::SweepAxis::LatentDim) {
        for (auto v : values) {
          if (v > base.d_x && !base.allow_ds_gt_dx) {
            throw gca::ConfigError("d_s = " + std::to_string(v) + " exceeds d_x; pass --allow-ds-gt-dx");
          }
        }
      }
      gca::SweepOptions opts;
      opts.methods.clear();
      std::stringstream ms(sweep_methods);
      for (std::string m; std::getline(ms, m, ',');) {
        if (!m.empty()) opts.methods.push_back(gca::parse_method(m));
      }
      opts.jobs = sweep_jobs;
      opts.on_row = [](const gca::SweepResultRow& r) {
        std::printf("%s d_s=%zu K=%zu seed=%llu mcc=%.4f time=%.1fs%s%s\n", std::string(gca::to_string(r.method)).c_str(),
                    r.d_s, r.K, static_cast<unsigned long long>(r.seed), r.mcc, r.wall_time_s,
                    r.error.empty() ? "" : " error: ", r.error.c_str());
        std::fflush(stdout);
      };
      const auto out = gca::run_sweep(base, axis, values, base.seeds, opts);
      std::printf("wrote %s\nwrote %s\nwrote %s\n", out.rows_csv.string().c_str(), out.aggregate_csv.string().c_str(),
                  out.plot_data.string().c_str());
    } else if (*idc) {
      // Same alpha as an experiment run with this root seed.
      gca::Rng links(id_seed, "links");
      const auto model = gca::build_link_model(id_ds, id_K, links());
      std::fputs(gca::format_report(gca::check_identifiability(model)).c_str(), stdout);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
