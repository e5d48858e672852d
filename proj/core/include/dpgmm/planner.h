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

// Noise planning: alternating updates of the Wishart scales, the Gaussian
// covariances with their budgets, and the weight transition matrix, followed
// by an independent check of the privacy ledger.

#ifndef DPGMM_PLANNER_H_
#define DPGMM_PLANNER_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgmm/adjacency.h"
#include "dpgmm/model.h"
#include "dpgmm/noise_plan.h"
#include "dpgmm/sdp_solver.h"

namespace dpgmm {

struct PlanOptions {
  int max_iter = 50;
  // Initial eps0 = eps_k = eps0_frac * epsilon. Ignored for feature
  // changes, which start from eps_k = epsilon / 2 and eps0 = 0.
  double eps0_frac = 1.0 / 3.0;
  double early_stop = 1e-3;
  double sdp_tol = kDefaultSdpTolerance;
  // Constraints kept per SDP solve before verification; 0 means 2 * d.
  int keep_constraints = 0;
};

// epsilon - eps0 - eps_k - 3 gamma_k / (2 N_k), evaluated left to right.
double BudgetMargin(double epsilon, double eps0, double eps_k, double gamma_k,
                    int64_t class_size);

// gamma_k = min((d + 1) / d tr(Sigma_k^{-1}), 2 N_k (eps - eps0 - eps_k) / 3).
// InfeasibleBudget when eps - eps0 - eps_k <= 0 for some class.
absl::StatusOr<std::vector<double>> UpdateGamma(const GmmParams& fit,
                                                double epsilon, double eps0,
                                                const std::vector<double>& eps_k);

// eps - max_k (eps_k + 3 gamma_k / (2 N_k)), rounded down until every
// BudgetMargin is nonnegative.
double UpdateEps0(double epsilon, const std::vector<ClassNoise>& classes,
                  const std::vector<int64_t>& class_sizes);

// Closed-form transition matrix for fixed eps0. Row i stays on j_star with
// probability 1 / (1 + m e^{eps0}) when g_i >= 0, 1 / (1 + m e^{-eps0})
// otherwise, and puts e^{+-eps0} times that on every other column.
TransitionPlan UpdateTransition(std::vector<WeightCounts> support, int j_star,
                                const std::vector<double>& g_values,
                                double eps0, double lambda,
                                double log_s_cardinality);

// sum_i F'_{i, j_star} g_i.
double TransitionObjective(const TransitionPlan& plan,
                           const std::vector<double>& g_values);

absl::StatusOr<NoisePlan> Plan(const GmmParams& fit, const AdjacencySet& adj,
                               const PrivacySpec& spec,
                               const PlanOptions& options = {});

// Largest d^T Gamma_k d over the class's adjacency differences and, when
// set, every vector within its isotropic radius.
absl::StatusOr<double> WorstQuadraticForm(const SymMatrix& gamma_inv,
                                          const AdjacencySet& adj, int cls);

struct LedgerReport {
  // Per class: epsilon - eps0 - eps_k - 3 gamma_k / (2 N_k).
  std::vector<double> budget_margins;
  // Per class: eps_k^2 / (2 ln(2 / delta)) - max quadratic form d^T Gamma d
  // over the adjacency differences and the isotropic bound.
  std::vector<double> schur_margins;
  // max over off-j_star entries of | |ln(F'_ij / F'_ij*)| - eps0 |.
  double ratio_error = 0.0;
  // max over rows of |row sum - 1|.
  double row_sum_error = 0.0;
  // Feature changes only: 1 - 8 B^2 ln(2 / delta) ||Gamma_k||_2 /
  // (N_k^2 eps_k^2).
  std::vector<double> feature_margins;

  bool budget_ok = true;
  bool schur_ok = true;
  bool ratio_ok = true;
  bool feature_ok = true;

  bool passed() const { return budget_ok && schur_ok && ratio_ok && feature_ok; }
  double worst_budget_margin() const;
  double worst_schur_margin() const;
};

// Tolerance on the transition ratio and row-sum checks.
inline constexpr double kRatioTolerance = 1e-12;

absl::StatusOr<LedgerReport> VerifyLedger(const NoisePlan& plan,
                                          const AdjacencySet& adj,
                                          const PrivacySpec& spec);

}  // namespace dpgmm

#endif  // DPGMM_PLANNER_H_
