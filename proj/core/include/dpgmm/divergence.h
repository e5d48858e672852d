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

// Expected and realized KL divergence between a released model and the fit.
// All values are in nats.

#ifndef DPGMM_DIVERGENCE_H_
#define DPGMM_DIVERGENCE_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgmm/linalg.h"
#include "dpgmm/model.h"
#include "dpgmm/noise_plan.h"

namespace dpgmm {

// Per-class noise cost
//   c_k = 1/2 (d ln gamma_k + (d + 1) / gamma_k tr(S_k) + tr(S_k G_k))
// with S_k = Sigma_k^{-1} and G_k = Gamma_k^{-1}.
absl::StatusOr<std::vector<double>> ComponentCosts(
    const GmmParams& fit, const std::vector<double>& gammas,
    const std::vector<SymMatrix>& gamma_invs);

// sum_k pt_k (ln(pt_k / pi_k) + c_k), pt = pi_tilde / |pi_tilde|.
double GValueFromCosts(const WeightCounts& pi_tilde, const WeightCounts& pi,
                       const std::vector<double>& costs);

absl::StatusOr<double> GValue(const WeightCounts& pi_tilde,
                              const GmmParams& fit,
                              const std::vector<double>& gammas,
                              const std::vector<SymMatrix>& gamma_invs);

// (d ln 2 + psi_d((d + 1) / 2)) / 2, subtracted from every expected KL.
double ExpectedKlConstant(int d);

struct KlReport {
  double analytic_expected_kl = 0.0;
  // Expected KL of the restricted branch alone (lambda term omitted).
  double restricted_expected_kl = 0.0;
  // E[sum_k pt_k ln(pt_k / pi_k)] under the full smoothed mapper.
  double weight_term = 0.0;
  // E[pt_k] c_k under the full smoothed mapper.
  std::vector<double> per_component_terms;
  double constant_term = 0.0;
  // E[g] over a uniform lattice draw, and its mixing weight.
  double uniform_branch_g = 0.0;
  double lambda = 0.0;
  std::optional<double> mc_estimate;
  std::optional<double> mc_stderr;
  std::optional<int64_t> mc_trials;
};

// E[g] under the smoothed mapper minus the constant term. The uniform
// branch is evaluated exactly from the marginal law of one lattice
// coordinate, P(count = j) = C(n - j - 1, k - 2) / C(n - 1, k - 1).
absl::StatusOr<KlReport> ExpectedKl(const GmmParams& fit,
                                    const NoisePlan& plan);

// KL of the released model from the fit, pairing component k with
// component k and weighting by the released weights.
absl::StatusOr<double> RealizedKl(const GmmParams& released,
                                  const GmmParams& fit);

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Mean and standard error of RealizedKl over `trials` independent releases.
// Trial t uses seed Mix64(Mix64(seed) + t); results are reduced pairwise in trial
// order, so the estimate does not depend on the worker count.
absl::StatusOr<McEstimate> MonteCarloExpectedKl(const GmmParams& fit,
                                                const NoisePlan& plan,
                                                int64_t trials, uint64_t seed);

}  // namespace dpgmm

#endif  // DPGMM_DIVERGENCE_H_
