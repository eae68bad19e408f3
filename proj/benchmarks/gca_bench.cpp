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

#include <benchmark/benchmark.h>

#include <utility>
#include <vector>

#include "gca/ebm.hpp"
#include "gca/estimator.hpp"
#include "gca/eval.hpp"
#include "gca/hungarian.hpp"
#include "gca/synthdata.hpp"

namespace {

using namespace gca;

GraphDataset desk_dataset() {
  return generate_dataset({LatentKind::IndependentLaplace, 4, 2000}, MixingNetwork::random(4, 4, 1),
                          build_link_model(4, 8, 2), {3, 4});
}

Matrix normal_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

// Forward + backward of the GCA minibatch objective (one training step
// without the optimizer update).
void BM_GcaObjectiveGradient(benchmark::State& state) {
  const auto ds = desk_dataset();
  const GcaModel m = GcaModel::init(4, 4, 8, 5);
  Rng rng(6);
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  const auto pairs = sample_pair_batch(ds, batch, rng);
  const auto objective = gca_objective(m.encoder.spec, make_gca_batch(ds.features(), pairs, random_permutation(batch, rng)));
  const ParamStore params = m.to_params();
  for (auto _ : state) benchmark::DoNotOptimize(ad::grad_of_scalar(objective, params));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_GcaObjectiveGradient)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_EbmObjectiveGradient(benchmark::State& state) {
  const auto ds = desk_dataset();
  const EbmParams p = EbmParams::init(4, 4, 5);
  Rng rng(6);
  const auto pairs = sample_pair_batch(ds, 100, rng);
  std::vector<std::pair<std::size_t, std::size_t>> ep;
  for (const auto& q : pairs) ep.emplace_back(q.i, q.j);
  const auto objective = ebm_objective(p.encoder.spec, make_ebm_batch(ds.features(), ep, random_permutation(100, rng)));
  const ParamStore params = p.to_params();
  for (auto _ : state) benchmark::DoNotOptimize(ad::grad_of_scalar(objective, params));
}
BENCHMARK(BM_EbmObjectiveGradient)->Unit(benchmark::kMicrosecond);

void BM_EncoderForward(benchmark::State& state) {
  Rng rng(1);
  const EncoderNetwork enc = EncoderNetwork::init(4, 4, rng);
  const Matrix x = normal_matrix(static_cast<std::size_t>(state.range(0)), 4, 2);
  for (auto _ : state) benchmark::DoNotOptimize(enc.encode(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncoderForward)->Arg(200)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_PairBatchSampling(benchmark::State& state) {
  const auto ds = desk_dataset();
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_pair_batch(ds, 100, rng));
}
BENCHMARK(BM_PairBatchSampling);

void BM_LinkWeight(benchmark::State& state) {
  const auto ds = desk_dataset();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ds.link_weight(i % 2000, (i * 7 + 1) % 2000 == i % 2000 ? (i + 1) % 2000 : (i * 7 + 1) % 2000));
    ++i;
  }
}
BENCHMARK(BM_LinkWeight);

void BM_MeanAbsCorr(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  const Matrix S = normal_matrix(10000, d, 1), H = normal_matrix(10000, d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mean_abs_corr(S, H));
}
BENCHMARK(BM_MeanAbsCorr)->Arg(4)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_Hungarian(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  Matrix m(d, d);
  for (double& v : m.data()) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(solve_max_assignment(m));
}
BENCHMARK(BM_Hungarian)->Arg(6)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
