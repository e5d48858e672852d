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

// Read-only verification of a noise plan: exact likelihood-ratio bounds for
// the weight mapper, Schur margins for the Gaussian mechanism, budget
// margins for the Wishart mechanism and a chi-square test of the sampler.

#ifndef DPGMM_AUDIT_H_
#define DPGMM_AUDIT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgmm/adjacency.h"
#include "dpgmm/noise_plan.h"

namespace dpgmm {

struct WeightAudit {
  double declared = 0.0;
  // max_{i, j != j*} |ln(F'_{i,j*} / F'_{i,j})|.
  double raw_ratio = 0.0;
  // The same maximum between the output laws of input j* and every other
  // input, each column renormalized and mixed with the uniform branch.
  double normalized_ratio = 0.0;
};

WeightAudit AuditWeightMechanism(const TransitionPlan& transition,
                                 double eps0);

struct GaussianClassAudit {
  double worst_quadratic_form = 0.0;
  double bound = 0.0;  // eps_k^2 / (2 ln(2 / delta))
  double margin = 0.0;
};

absl::StatusOr<std::vector<GaussianClassAudit>> AuditGaussian(
    const NoisePlan& plan, const AdjacencySet& adj, const PrivacySpec& spec);

struct FrequencyAudit {
  int64_t draws = 0;
  // One bucket per support element, then the "elsewhere" bucket.
  std::vector<int64_t> observed;
  std::vector<double> expected_probability;
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double critical_value = 0.0;
  bool passed = true;
};

inline constexpr double kFrequencySignificance = 0.001;

// Samples the weight mapper `draws` times and compares bucket counts with
// the intended law by a chi-square test at kFrequencySignificance. Buckets
// with zero expected mass must stay empty.
FrequencyAudit AuditEmpiricalFrequencies(const TransitionPlan& transition,
                                         int64_t draws, uint64_t seed);

struct AuditOptions {
  // Require normalized_ratio <= eps0 instead of <= 2 eps0.
  bool strict = false;
  int64_t draws = 100000;
  uint64_t seed = 0;
};

struct AuditReport {
  std::optional<WeightAudit> weight;
  std::vector<GaussianClassAudit> gaussian;
  std::vector<double> wishart_budget_margins;
  std::optional<FrequencyAudit> frequency;
  int64_t admissible_flips = 0;
  int64_t excluded_flips = 0;
  bool strict = false;
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  bool hard_failure() const { return !failures.empty(); }
};

absl::StatusOr<AuditReport> Audit(const NoisePlan& plan,
                                  const AdjacencySet& adj,
                                  const PrivacySpec& spec,
                                  const AuditOptions& options = {});

}  // namespace dpgmm

#endif  // DPGMM_AUDIT_H_
