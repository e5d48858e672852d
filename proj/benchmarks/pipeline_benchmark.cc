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

#include "benchmark/benchmark.h"
#include "dpgmm/adjacency.h"
#include "dpgmm/divergence.h"
#include "dpgmm/experiments.h"
#include "dpgmm/mechanisms.h"
#include "dpgmm/planner.h"

namespace dpgmm {
namespace {

struct Fixture {
  GmmParams fit;
  AdjacencySet adj;
  PrivacySpec spec;
};

Fixture MakeFixture(int k, int d, int64_t n) {
  SyntheticData synth = GenerateSynthetic(k, d, n, 11).value();
  GmmParams fit = FitGmm(synth.data).value();
  AdjacencySet adj = EnumerateLabelFlip(synth.data, fit);
  PrivacySpec spec = PrivacySpec::Create(1.0, 1e-5, 1e-3, {}).value();
  return Fixture{std::move(fit), std::move(adj), spec};
}

void BM_EnumerateLabelFlip(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  SyntheticData synth = GenerateSynthetic(k, 3, state.range(1), 12).value();
  GmmParams fit = FitGmm(synth.data).value();
  for (auto _ : state) {
    AdjacencySet adj = EnumerateLabelFlip(synth.data, fit);
    benchmark::DoNotOptimize(adj);
  }
}
BENCHMARK(BM_EnumerateLabelFlip)
    ->ArgsProduct({{2, 5, 8}, {1000, 10000}})
    ->Unit(benchmark::kMillisecond);

void BM_Plan(benchmark::State& state) {
  const Fixture f = MakeFixture(static_cast<int>(state.range(0)),
                                static_cast<int>(state.range(1)), 1000);
  for (auto _ : state) {
    auto plan = Plan(f.fit, f.adj, f.spec);
    benchmark::DoNotOptimize(plan);
  }
}
BENCHMARK(BM_Plan)
    ->ArgsProduct({{2, 5, 8}, {2, 3, 6}})
    ->Unit(benchmark::kMillisecond);

void BM_Release(benchmark::State& state) {
  const Fixture f = MakeFixture(5, static_cast<int>(state.range(0)), 1000);
  const NoisePlan plan = Plan(f.fit, f.adj, f.spec).value();
  uint64_t seed = 0;
  for (auto _ : state) {
    auto released = Release(f.fit, plan, seed++);
    benchmark::DoNotOptimize(released);
  }
}
BENCHMARK(BM_Release)->Arg(2)->Arg(6)->Arg(12);

void BM_ExpectedKl(benchmark::State& state) {
  const Fixture f = MakeFixture(static_cast<int>(state.range(0)), 3,
                                state.range(1));
  const NoisePlan plan = Plan(f.fit, f.adj, f.spec).value();
  for (auto _ : state) {
    auto report = ExpectedKl(f.fit, plan);
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(BM_ExpectedKl)
    ->ArgsProduct({{2, 5, 8}, {1000, 100000}})
    ->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace dpgmm

BENCHMARK_MAIN();
