// Copyright 2026 The AMTRL Authors. All rights reserved.
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

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "amtrl/allocation.hpp"
#include "amtrl/instance.hpp"
#include "amtrl/relevance.hpp"
#include "amtrl/trainer.hpp"

namespace amtrl {
namespace {

void BM_Lasso(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const GroundTruth gt = make_random_instance(20, 5, T, 0.0, 0.5, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lasso(gt.W_star, gt.w_target_star, 1e-3));
  }
}
BENCHMARK(BM_Lasso)->Arg(10)->Arg(50)->Arg(200);

void BM_L1OracleLp(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const GroundTruth gt = make_random_instance(20, 5, T, 0.0, 0.5, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(l1_oracle_lp(gt.W_star, gt.w_target_star));
  }
}
BENCHMARK(BM_L1OracleLp)->Arg(10)->Arg(50)->Arg(200);

void BM_WaterFill(benchmark::State& state) {
  const Vector nu = almost_sparse_nu(static_cast<int>(state.range(0)));
  const Vector weights = nu.cwiseAbs();
  for (auto _ : state) {
    benchmark::DoNotOptimize(water_fill(weights, 1e6, 10.0));
  }
}
BENCHMARK(BM_WaterFill)->Arg(50)->Arg(1000);

void BM_AllocateFixedNu(benchmark::State& state) {
  const Vector nu = almost_sparse_nu(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(allocate_fixed_nu(nu, 1000000, 10));
  }
}
BENCHMARK(BM_AllocateFixedNu)->Arg(50)->Arg(1000);

void BM_FitSource(benchmark::State& state) {
  const GroundTruth gt = make_random_instance(30, 5, 20, 0.5, 0.5, 3);
  std::vector<TaskDataset> data;
  for (int t = 1; t <= gt.T; ++t) data.push_back(sample_task(gt, t, state.range(0), 4));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_source(data, gt.k));
  }
}
BENCHMARK(BM_FitSource)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace amtrl

BENCHMARK_MAIN();
