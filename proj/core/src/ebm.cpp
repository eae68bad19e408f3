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

#include "gca/ebm.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "gca/binary_io.hpp"
#include "gca/error.hpp"

namespace gca {

namespace {

constexpr const char* kHeadPrefix = "head";

MlpSpec head_spec(std::size_t d_s) { return MlpSpec{{d_s, 1}, Activation::none()}; }

}  // namespace

EbmParams EbmParams::init(std::size_t d_x, std::size_t d_s, std::uint64_t seed) {
  TrainStreams streams(seed);
  EbmParams p{EncoderNetwork::init(d_x, d_s, streams.model_init), {}, {}};
  ParamStore head;
  init_mlp_params(head_spec(d_s), kHeadPrefix, streams.model_init, head);
  p.head_w = head.get(weight_name(kHeadPrefix, 0));
  p.head_b = head.get(bias_name(kHeadPrefix, 0));
  return p;
}

ParamStore EbmParams::to_params() const {
  ParamStore out = encoder.params;
  out.add(weight_name(kHeadPrefix, 0), head_w);
  out.add(bias_name(kHeadPrefix, 0), head_b);
  return out;
}

EbmParams EbmParams::from_params(std::size_t d_x, std::size_t d_s, const ParamStore& params) {
  EbmParams p{{EncoderNetwork::make_spec(d_x, d_s), params.subset(std::string(EncoderNetwork::kPrefix) + ".")},
              params.get(weight_name(kHeadPrefix, 0)),
              params.get(bias_name(kHeadPrefix, 0))};
  if (p.head_w.rows() != d_s || p.head_w.cols() != 1 || p.head_b.rows() != 1 || p.head_b.cols() != 1) {
    throw ShapeError("EBM head must be " + std::to_string(d_s) + "x1 plus a scalar bias");
  }
  return p;
}

double ebm_ratio(const EbmParams& p, std::span<const double> x, std::span<const double> x_prime) {
  const std::size_t d_x = p.encoder.d_x();
  if (x.size() != d_x || x_prime.size() != d_x) {
    throw ShapeError("ebm_ratio: inputs must have length " + std::to_string(d_x));
  }
  const Matrix h = p.encoder.encode(Matrix(1, d_x, std::vector<double>(x.begin(), x.end())));
  const Matrix hp = p.encoder.encode(Matrix(1, d_x, std::vector<double>(x_prime.begin(), x_prime.end())));
  double inner = 0.0;
  for (std::size_t i = 0; i < h.cols(); ++i) inner += h(0, i) * hp(0, i);
  const double a = affine(h, p.head_w, p.head_b)(0, 0);
  return inner + a;
}

EbmBatch make_ebm_batch(const Matrix& features, std::span<const std::pair<std::size_t, std::size_t>> pairs,
                        std::vector<std::size_t> permutation) {
  if (permutation.size() != pairs.size()) throw ShapeError("permutation length does not match batch size");
  std::vector<std::size_t> first(pairs.size()), second(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    first[p] = pairs[p].first;
    second[p] = pairs[p].second;
  }
  return {gather_rows(features, first), gather_rows(features, second), std::move(permutation)};
}

ad::Var ebm_dv_objective(ad::Tape& tape, const ad::ParamVars& params, const MlpSpec& encoder_spec,
                         const EbmBatch& batch) {
  const std::size_t m = batch.x_first.rows();
  if (m == 0) throw ShapeError("empty minibatch");
  if (batch.x_second.rows() != m || batch.permutation.size() != m) {
    throw ShapeError("EBM minibatch parts have inconsistent sizes");
  }
  const ad::Var x = tape.constant(vstack(batch.x_first, batch.x_second), "x");
  const ad::Var h = mlp_forward(tape, encoder_spec, params, EncoderNetwork::kPrefix, x);
  const ad::Var h_first = ad::slice_rows(tape, h, 0, m);
  const ad::Var h_second = ad::slice_rows(tape, h, m, 2 * m);
  const ad::Var h_neg = ad::gather_rows(tape, h_second, batch.permutation);
  const ad::Var a = ad::affine(tape, h_first, params[weight_name(kHeadPrefix, 0)], params[bias_name(kHeadPrefix, 0)]);
  const ad::Var r_pos = ad::add(tape, ad::row_sum(tape, ad::mul(tape, h_first, h_second)), a);
  const ad::Var r_neg = ad::add(tape, ad::row_sum(tape, ad::mul(tape, h_first, h_neg)), a);
  return ad::sub(tape, ad::log_mean_exp(tape, r_neg), ad::mean(tape, r_pos));
}

ad::Objective ebm_objective(const MlpSpec& encoder_spec, EbmBatch batch) {
  return [spec = encoder_spec, batch = std::move(batch)](ad::Tape& tape, const ad::ParamVars& params) {
    return ebm_dv_objective(tape, params, spec, batch);
  };
}

double ebm_empirical_objective(const EbmParams& p, const EbmBatch& batch) {
  ad::Tape tape;
  const ParamStore params = p.to_params();
  ad::ParamVars vars(tape, params);
  return tape.scalar(ebm_dv_objective(tape, vars, p.encoder.spec, batch));
}

EbmTrainResult train_ebm(const Matrix& features, std::size_t d_s, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t d_x = features.cols();
  EbmParams init = EbmParams::init(d_x, d_s, cfg.seed);
  ParamStore params = init.to_params();
  TrainStreams streams(cfg.seed);
  const MlpSpec spec = init.encoder.spec;
  LossTrace trace = run_adam(params, cfg, [&](std::size_t) {
    const auto pairs = sample_pair_indices(features.rows(), cfg.minibatch_size, streams.batches);
    auto perm = random_permutation(pairs.size(), streams.permutations);
    return ebm_objective(spec, make_ebm_batch(features, pairs, std::move(perm)));
  });
  return {EbmParams::from_params(d_x, d_s, params), std::move(trace)};
}

void write_ebm_checkpoint(std::ostream& out, const EbmParams& p) {
  using namespace binary;
  write_magic(out, "EBMM");
  write_u32(out, static_cast<std::uint32_t>(p.encoder.d_x()));
  write_u32(out, static_cast<std::uint32_t>(p.encoder.d_s()));
  write_u32(out, static_cast<std::uint32_t>(EncoderNetwork::kHiddenWidth));
  write_u32(out, static_cast<std::uint32_t>(EncoderNetwork::kNumLayers));
  write_f64s(out, p.to_params().flat());
  if (!out) throw FormatError("failed writing checkpoint");
}

EbmParams read_ebm_checkpoint(std::istream& in) {
  using namespace binary;
  expect_magic(in, "EBMM");
  const std::uint32_t d_x = read_u32(in, "d_x");
  const std::uint32_t d_s = read_u32(in, "d_s");
  const std::uint32_t hidden = read_u32(in, "hidden_width");
  const std::uint32_t layers = read_u32(in, "num_layers");
  if (hidden != EncoderNetwork::kHiddenWidth || layers != EncoderNetwork::kNumLayers) {
    throw FormatError("checkpoint encoder shape is not supported");
  }
  if (d_x == 0 || d_s == 0) throw FormatError("checkpoint header has a zero dimension");
  const EbmParams templ{EncoderNetwork::zeros(d_x, d_s), Matrix(d_s, 1), Matrix(1, 1)};
  const ParamStore layout = templ.to_params();
  std::vector<double> flat(layout.size());
  read_f64s(in, flat, "parameters");
  expect_eof(in);
  return EbmParams::from_params(d_x, d_s, layout.unpack(flat));
}

void save_ebm_checkpoint(const std::filesystem::path& path, const EbmParams& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_ebm_checkpoint(out, p);
}

EbmParams load_ebm_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_ebm_checkpoint(in);
}

}  // namespace gca
