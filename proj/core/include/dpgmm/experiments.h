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

// Synthetic mixtures and parameter sweeps of the expected KL.

#ifndef DPGMM_EXPERIMENTS_H_
#define DPGMM_EXPERIMENTS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "dpgmm/model.h"
#include "dpgmm/planner.h"

namespace dpgmm {

struct SyntheticData {
  LabeledDataset data;
  // Generating means and covariances; weights are the realized label counts.
  GmmParams truth;
};

// Weights ~ Dirichlet(1, ..., 1), means ~ U[-10, 10]^d, covariances
// ~ W_d(I, d + 1), then n labeled draws. Labels are redrawn until every class
// has at least two points; after 100 failed draws the weights are redrawn.
absl::StatusOr<SyntheticData> GenerateSynthetic(int k, int d, int64_t n,
                                                uint64_t seed);

enum class SweepVariable { kEpsilon, kN, kK, kD, kClip };

absl::string_view SweepVariableName(SweepVariable v);
absl::StatusOr<SweepVariable> ParseSweepVariable(absl::string_view name);

struct SweepBase {
  int k = 5;
  int d = 3;
  int64_t n = 1000;
  double epsilon = 1.0;
  double delta = 1e-5;
  double lambda = 1e-3;
  // Clip bound for kClip sweeps, which use feature-change adjacency.
  double clip_bound = 1.0;
};

struct SweepSpec {
  SweepVariable variable = SweepVariable::kEpsilon;
  std::vector<double> grid;
  int trials = 20;
  SweepBase base;
  uint64_t seed = 0;
  int d_cap = 6;
  PlanOptions plan_options;
};

struct SweepRow {
  double value = 0.0;
  int trial = 0;
  double kl = 0.0;
  int iterations = 0;
  int attempts = 0;
};

struct SweepSummaryRow {
  double value = 0.0;
  int count = 0;
  double mean = 0.0;
  // 1.96 sample standard deviations over sqrt(count).
  double half_width = 0.0;
};

struct SweepFailure {
  double value = 0.0;
  int trial = 0;
  std::string message;
};

struct SweepResult {
  SweepVariable variable = SweepVariable::kEpsilon;
  std::vector<SweepRow> rows;
  std::vector<SweepSummaryRow> summary;
  std::vector<SweepFailure> failures;
};

inline constexpr int kSweepRetries = 3;

// Runs fit, plan and expected KL for every (value, trial). The data seed
// depends on (seed, trial, k, d, n, attempt) only, so every value of an
// epsilon or clip sweep sees the same datasets. A failing trial is retried
// with new data up to kSweepRetries times, then recorded and skipped.
absl::StatusOr<SweepResult> RunSweep(const SweepSpec& spec);

// Writes raw.csv (variable,value,trial,kl), summary.csv
// (variable,value,count,mean,half_width) and failures.csv into dir.
absl::Status WriteSweep(const SweepResult& result, const std::string& dir);

}  // namespace dpgmm

#endif  // DPGMM_EXPERIMENTS_H_
