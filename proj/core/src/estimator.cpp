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

#include "gca/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <fstream>

#include "gca/binary_io.hpp"
#include "gca/error.hpp"

namespace gca {

namespace {

constexpr const char* kBeta = "ratio.beta";
constexpr const char* kBias = "ratio.bias";

std::vector<std::size_t> state_indices(std::span<const int> weights, std::size_t K, const char* what) {
  std::vector<std::size_t> idx(weights.size());
  for (std::size_t p = 0; p < weights.size(); ++p) {
    const int w = weights[p];
    if (w < 1 || static_cast<std::size_t>(w) > K) {
      throw ConfigError(std::string(what) + " " + std::to_string(w) + " outside {1.." + std::to_string(K) + "}");
    }
    idx[p] = static_cast<std::size_t>(w - 1);
  }
  return idx;
}

void check_permutation(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size() || !std::is_permutation(a.begin(), a.end(), b.begin())) {
    throw ConfigError("permuted weights are not a permutation of the batch weights");
  }
}

}  // namespace

void RatioParams::validate() const {
  if (beta.rows() == 0 || beta.cols() == 0) throw ShapeError("ratio beta must be non-empty");
  if (bias.rows() != beta.rows() || bias.cols() != 1) {
    throw ShapeError("ratio bias must be " + std::to_string(beta.rows()) + "x1, got " + shape_string(bias));
  }
  if (!beta.all_finite() || !bias.all_finite()) throw NumericError("ratio parameters are not finite");
}

RatioParams RatioParams::init(std::size_t K, std::size_t d_s, Rng& rng) {
  RatioParams rp{Matrix(K, d_s), Matrix(K, 1)};
  for (std::size_t w = 0; w < K; ++w) {
    for (std::size_t i = 0; i < d_s; ++i) rp.beta(w, i) = (i == w ? 1.0 : 0.0) + 0.1 * rng.uniform();
  }
  return rp;
}

GcaModel GcaModel::init(std::size_t d_x, std::size_t d_s, std::size_t K, std::uint64_t seed) {
  if (K < 1) throw ConfigError("K must be >= 1");
  TrainStreams streams(seed);
  GcaModel m{EncoderNetwork::init(d_x, d_s, streams.model_init), {}};
  m.ratio = RatioParams::init(K, d_s, streams.model_init);
  return m;
}

ParamStore GcaModel::to_params() const {
  ParamStore p = encoder.params;
  p.add(kBeta, ratio.beta);
  p.add(kBias, ratio.bias);
  return p;
}

GcaModel GcaModel::from_params(std::size_t d_x, std::size_t d_s, std::size_t K, const ParamStore& params) {
  GcaModel m{{EncoderNetwork::make_spec(d_x, d_s), params.subset(std::string(EncoderNetwork::kPrefix) + ".")},
             {params.get(kBeta), params.get(kBias)}};
  m.ratio.validate();
  if (m.ratio.K() != K || m.ratio.d_s() != d_s) throw ShapeError("ratio parameter shapes do not match K and d_s");
  return m;
}

double ratio_value(const EncoderNetwork& enc, const RatioParams& rp, int w, std::span<const double> x,
                   std::span<const double> x_prime) {
  if (w < 1 || static_cast<std::size_t>(w) > rp.K()) {
    throw ConfigError("link state " + std::to_string(w) + " outside {1.." + std::to_string(rp.K()) + "}");
  }
  if (x.size() != enc.d_x() || x_prime.size() != enc.d_x()) {
    throw ShapeError("ratio_value: inputs must have length " + std::to_string(enc.d_x()));
  }
  const Matrix h = enc.encode(Matrix(1, x.size(), std::vector<double>(x.begin(), x.end())));
  const Matrix hp = enc.encode(Matrix(1, x_prime.size(), std::vector<double>(x_prime.begin(), x_prime.end())));
  const auto row = static_cast<std::size_t>(w - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < rp.d_s(); ++i) acc += rp.beta(row, i) * (h(0, i) * hp(0, i));
  const double r = acc + rp.bias(row, 0);
  if (!std::isfinite(r)) throw NumericError("ratio_value is not finite");
  return r;
}

std::vector<PairSample> sample_pair_batch(const GraphDataset& ds, std::size_t m, Rng& rng) {
  std::vector<PairSample> batch;
  batch.reserve(m);
  for (auto [i, j] : sample_pair_indices(ds.n(), m, rng)) batch.push_back({i, j, ds.link_weight(i, j)});
  return batch;
}

GcaBatch make_gca_batch(const Matrix& features, std::span<const PairSample> pairs,
                        std::span<const std::size_t> permutation) {
  if (permutation.size() != pairs.size()) throw ShapeError("permutation length does not match batch size");
  std::vector<std::size_t> first(pairs.size()), second(pairs.size());
  GcaBatch b;
  b.weights.resize(pairs.size());
  b.permuted_weights.resize(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    first[p] = pairs[p].i;
    second[p] = pairs[p].j;
    b.weights[p] = pairs[p].w;
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (permutation[p] >= pairs.size()) throw ShapeError("permutation index out of range");
    b.permuted_weights[p] = b.weights[permutation[p]];
  }
  b.x_first = gather_rows(features, first);
  b.x_second = gather_rows(features, second);
  return b;
}

ad::Var gca_dv_objective(ad::Tape& tape, const ad::ParamVars& params, const MlpSpec& encoder_spec,
                         const GcaBatch& batch) {
  const std::size_t m = batch.weights.size();
  if (m == 0) throw ShapeError("empty minibatch");
  if (batch.x_first.rows() != m || batch.x_second.rows() != m) {
    throw ShapeError("minibatch features do not match the number of weights");
  }
  check_permutation(batch.weights, batch.permuted_weights);
  const ad::Var beta = params[kBeta];
  const ad::Var bias = params[kBias];
  const std::size_t K = tape.value(beta).rows();
  auto pos_idx = state_indices(batch.weights, K, "link state");
  auto neg_idx = state_indices(batch.permuted_weights, K, "permuted link state");

  // Both endpoints go through the encoder in one 2m-row pass.
  const ad::Var x = tape.constant(vstack(batch.x_first, batch.x_second), "x");
  const ad::Var h = mlp_forward(tape, encoder_spec, params, EncoderNetwork::kPrefix, x);
  const ad::Var h_first = ad::slice_rows(tape, h, 0, m);
  const ad::Var h_second = ad::slice_rows(tape, h, m, 2 * m);
  const ad::Var prod = ad::mul(tape, h_first, h_second);

  auto ratio = [&](std::vector<std::size_t> idx) {
    const ad::Var b_rows = ad::gather_rows(tape, bias, idx);
    const ad::Var beta_rows = ad::gather_rows(tape, beta, std::move(idx));
    return ad::add(tape, ad::row_sum(tape, ad::mul(tape, beta_rows, prod)), b_rows);
  };
  const ad::Var r_pos = ratio(std::move(pos_idx));
  const ad::Var r_neg = ratio(std::move(neg_idx));
  return ad::sub(tape, ad::log_mean_exp(tape, r_neg), ad::mean(tape, r_pos));
}

ad::Objective gca_objective(const MlpSpec& encoder_spec, GcaBatch batch) {
  return [spec = encoder_spec, batch = std::move(batch)](ad::Tape& tape, const ad::ParamVars& params) {
    return gca_dv_objective(tape, params, spec, batch);
  };
}

double dv_empirical_objective(const EncoderNetwork& enc, const RatioParams& rp, const GcaBatch& batch) {
  GcaModel model{enc, rp};
  ad::Tape tape;
  const ParamStore params = model.to_params();
  ad::ParamVars vars(tape, params);
  return tape.scalar(gca_dv_objective(tape, vars, enc.spec, batch));
}

GcaTrainResult train_gca(const GraphDataset& ds, const TrainConfig& cfg) {
  return train_gca(ds, cfg, GcaModel::init(ds.d_x(), ds.d_s(), ds.K(), cfg.seed));
}

GcaTrainResult train_gca(const GraphDataset& ds, const TrainConfig& cfg, GcaModel initial) {
  cfg.validate();
  if (initial.ratio.K() != ds.K()) {
    throw ConfigError("model has K = " + std::to_string(initial.ratio.K()) + " but dataset has K = " +
                      std::to_string(ds.K()));
  }
  if (initial.encoder.d_x() != ds.d_x()) throw ShapeError("encoder input width does not match dataset d_x");
  const std::size_t d_s = initial.encoder.d_s();
  ParamStore params = initial.to_params();
  TrainStreams streams(cfg.seed);
  const MlpSpec spec = initial.encoder.spec;
  LossTrace trace = run_adam(params, cfg, [&](std::size_t) {
    const auto pairs = sample_pair_batch(ds, cfg.minibatch_size, streams.batches);
    const auto perm = random_permutation(pairs.size(), streams.permutations);
    return gca_objective(spec, make_gca_batch(ds.features(), pairs, perm));
  });
  return {GcaModel::from_params(ds.d_x(), d_s, ds.K(), params), std::move(trace)};
}

void write_gca_checkpoint(std::ostream& out, const GcaModel& model) {
  using namespace binary;
  write_magic(out, "GCAM");
  write_u32(out, static_cast<std::uint32_t>(model.encoder.d_x()));
  write_u32(out, static_cast<std::uint32_t>(model.encoder.d_s()));
  write_u32(out, static_cast<std::uint32_t>(model.ratio.K()));
  write_u32(out, static_cast<std::uint32_t>(EncoderNetwork::kHiddenWidth));
  write_u32(out, static_cast<std::uint32_t>(EncoderNetwork::kNumLayers));
  write_f64s(out, model.to_params().flat());
  if (!out) throw FormatError("failed writing checkpoint");
}

GcaModel read_gca_checkpoint(std::istream& in) {
  using namespace binary;
  expect_magic(in, "GCAM");
  const std::uint32_t d_x = read_u32(in, "d_x");
  const std::uint32_t d_s = read_u32(in, "d_s");
  const std::uint32_t K = read_u32(in, "K");
  const std::uint32_t hidden = read_u32(in, "hidden_width");
  const std::uint32_t layers = read_u32(in, "num_layers");
  if (hidden != EncoderNetwork::kHiddenWidth || layers != EncoderNetwork::kNumLayers) {
    throw FormatError("checkpoint encoder shape " + std::to_string(layers) + " layers x " + std::to_string(hidden) +
                      " is not supported");
  }
  if (d_x == 0 || d_s == 0 || K == 0) throw FormatError("checkpoint header has a zero dimension");
  // Layout template: any parameter values, right shapes.
  const GcaModel templ{EncoderNetwork::zeros(d_x, d_s), {Matrix(K, d_s), Matrix(K, 1)}};
  const ParamStore layout = templ.to_params();
  std::vector<double> flat(layout.size());
  read_f64s(in, flat, "parameters");
  expect_eof(in);
  return GcaModel::from_params(d_x, d_s, K, layout.unpack(flat));
}

void save_gca_checkpoint(const std::filesystem::path& path, const GcaModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_gca_checkpoint(out, model);
}

GcaModel load_gca_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_gca_checkpoint(in);
}

}  // namespace gca
