// Copyright 2026 The dpgmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include "benchmark/benchmark.h"
#include "dpgmm/sdp_solver.h"

namespace dpgmm {
namespace {

SdpProblem MakeProblem(int d, int m, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = normal(gen);
  }
  SdpProblem p;
  p.objective_weight = SymMatrix(g * g.transpose() + Matrix::Identity(d, d));
  for (int i = 0; i < m; ++i) {
    Vector v(d);
    for (int j = 0; j < d; ++j) v(j) = normal(gen);
    p.constraints.push_back(v);
  }
  p.bound_c = 2.0;
  return p;
}

void BM_SolveSdp(benchmark::State& state) {
  const SdpProblem p = MakeProblem(static_cast<int>(state.range(0)),
                                   static_cast<int>(state.range(1)), 1);
  for (auto _ : state) {
    auto sol = SolveSdp(p);
    benchmark::DoNotOptimize(sol);
  }
}
BENCHMARK(BM_SolveSdp)
    ->ArgsProduct({{2, 4, 8}, {10, 50}})
    ->Unit(benchmark::kMillisecond);

void BM_SolveSdpPruned(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const SdpProblem p = MakeProblem(d, static_cast<int>(state.range(1)), 2);
  for (auto _ : state) {
    auto sol = SolveSdpPruned(p, kDefaultSdpTolerance, 8 * d);
    benchmark::DoNotOptimize(sol);
  }
}
BENCHMARK(BM_SolveSdpPruned)
    ->ArgsProduct({{2, 4, 8}, {1000, 5000}})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dpgmm

BENCHMARK_MAIN();
