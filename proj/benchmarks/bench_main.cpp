// Copyright 2026 The flagtune Authors
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

#include <vector>

#include "flagtune/active_learn.hpp"
#include "flagtune/featsel.hpp"
#include "flagtune/gp.hpp"
#include "flagtune/random.hpp"
#include "flagtune/sampling.hpp"

namespace {

using namespace flagtune;

Dataset bowl(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    double y = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = uniform01(rng);
      y += (x[j] - 0.4) * (x[j] - 0.4);
    }
    data.add(x, y);
  }
  return data;
}

void BM_Sobol(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sobol(1024, d));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_Sobol)->Arg(8)->Arg(126)->Arg(1024);

void BM_GpFit(benchmark::State& state) {
  const auto data = bowl(static_cast<std::size_t>(state.range(0)), 8, 1);
  GpOptions options;
  options.restarts = 2;
  for (auto _ : state) benchmark::DoNotOptimize(gp_fit(data, options, 3));
}
BENCHMARK(BM_GpFit)->Arg(10)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_GpPosterior(benchmark::State& state) {
  const GpSurrogate gp(bowl(static_cast<std::size_t>(state.range(0)), 8, 1), KernelType::matern52, {});
  const std::vector<double> x(8, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(gp.posterior(x));
}
BENCHMARK(BM_GpPosterior)->Arg(30)->Arg(60);

void BM_Lasso(benchmark::State& state) {
  const auto data = bowl(600, static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(fit_lasso(data));
}
BENCHMARK(BM_Lasso)->Arg(20)->Arg(126)->Unit(benchmark::kMillisecond);

void BM_SelectBatch(benchmark::State& state) {
  const std::size_t d = 20;
  const auto labeled = bowl(60, d, 4);
  const FeatureMap map{d, 2};
  SgdParams sgd;
  sgd.batch_size = 1;
  sgd.epochs = 50;
  AlState s;
  s.labeled = labeled;
  s.model = fit_sgd(labeled, map, sgd);
  s.ensemble = bootstrap_ensemble(labeled, 8, map, sgd, 5);
  s.pool = bowl(static_cast<std::size_t>(state.range(0)), d, 6).x;
  for (auto _ : state) benchmark::DoNotOptimize(select_batch(s, 10));
}
BENCHMARK(BM_SelectBatch)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
