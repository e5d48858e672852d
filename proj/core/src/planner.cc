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

#include "dpgmm/planner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "absl/strings/str_cat.h"
#include "dpgmm/divergence.h"
#include "dpgmm/parallel.h"
#include "dpgmm/status.h"

namespace dpgmm {
namespace {

// Closed-form covariances are scaled up by this relative amount so the
// ledger holds with a nonnegative margin after rounding.
constexpr double kClosedFormInflation = 1e-12;

double Log2OverDelta(double delta) { return std::log(2.0 / delta); }

absl::StatusOr<SymMatrix> SolveClass(const GmmParams& fit,
                                     const AdjacencySet& adj, int cls,
                                     double eps_k, double delta, double tol,
                                     int keep,
                                     const std::optional<SymMatrix>& hint) {
  const double c = 2.0 * Log2OverDelta(delta) / (eps_k * eps_k);
  const std::vector<Vector>& diffs = adj.mean_diffs[cls];
  const double radius = adj.isotropic_radius[cls];
  if (!diffs.empty() && radius > 0) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "mixed enumerated and isotropic constraints");
  }
  if (radius > 0) {
    return SymMatrix::Identity(fit.d()) *
           (c * radius * radius * (1.0 + kClosedFormInflation));
  }
  if (diffs.empty()) {
    return MakeError(ErrorCode::kDegenerateAdjacency,
                     absl::StrCat("class ", cls + 1,
                                  " has no adjacency constraint and no bound"));
  }
  DPGMM_ASSIGN_OR_RETURN(SymMatrix sigma_inv, InverseSpd(fit.covs[cls]));
  SdpProblem problem{sigma_inv, diffs, c};
  absl::StatusOr<SdpSolution> sol = SolveSdpPruned(problem, tol, keep, hint);
  if (!sol.ok()) {
    if (ErrorCodeOf(sol) == ErrorCode::kDegenerateAdjacency) {
      return MakeError(ErrorCode::kDegenerateAdjacency,
                       absl::StrCat("class ", cls + 1,
                                    " has only zero adjacency differences"));
    }
    return sol.status();
  }
  return std::move(sol->x);
}

// True when the previous iterate still passes the class's Schur test at the
// current eps_k and costs no more than the fresh solve. Keeping it makes the
// objective trace immune to re-solve jitter once the split has settled.
absl::StatusOr<bool> PreviousIsNoWorse(const GmmParams& fit,
                                       const AdjacencySet& adj, int cls,
                                       double eps_k, double delta,
                                       const std::optional<SymMatrix>& previous,
                                       const SymMatrix& fresh) {
  if (!previous.has_value()) return false;
  DPGMM_ASSIGN_OR_RETURN(const double worst,
                         WorstQuadraticForm(*previous, adj, cls));
  if (!(eps_k * eps_k / (2.0 * Log2OverDelta(delta)) - worst >= 0)) {
    return false;
  }
  DPGMM_ASSIGN_OR_RETURN(SymMatrix sigma_inv, InverseSpd(fit.covs[cls]));
  const Matrix& a = sigma_inv.matrix();
  return a.cwiseProduct(previous->matrix()).sum() <=
         a.cwiseProduct(fresh.matrix()).sum();
}

}  // namespace

double BudgetMargin(double epsilon, double eps0, double eps_k, double gamma_k,
                    int64_t class_size) {
  return epsilon - eps0 - eps_k -
         3.0 * gamma_k / (2.0 * static_cast<double>(class_size));
}

absl::StatusOr<std::vector<double>> UpdateGamma(
    const GmmParams& fit, double epsilon, double eps0,
    const std::vector<double>& eps_k) {
  const double d = fit.d();
  std::vector<double> gammas(fit.k());
  for (int c = 0; c < fit.k(); ++c) {
    const double room = epsilon - eps0 - eps_k[c];
    if (!(room > 0)) {
      return MakeError(
          ErrorCode::kInfeasibleBudget,
          absl::StrCat("class ", c + 1, ": epsilon - eps0 - eps_k = ", room,
                       " leaves no budget for the covariance"));
    }
    DPGMM_ASSIGN_OR_RETURN(SymMatrix sigma_inv, InverseSpd(fit.covs[c]));
    const double unconstrained = (d + 1) / d * sigma_inv.trace();
    const double cap =
        2.0 * static_cast<double>(fit.weights.counts[c]) * room / 3.0;
    gammas[c] = std::min(unconstrained, cap);
  }
  return gammas;
}

double UpdateEps0(double epsilon, const std::vector<ClassNoise>& classes,
                  const std::vector<int64_t>& class_sizes) {
  double used = 0.0;
  for (size_t c = 0; c < classes.size(); ++c) {
    used = std::max(used, classes[c].eps_k +
                              3.0 * classes[c].gamma_k /
                                  (2.0 * static_cast<double>(class_sizes[c])));
  }
  double eps0 = epsilon - used;
  for (size_t c = 0; c < classes.size(); ++c) {
    while (eps0 > 0 && BudgetMargin(epsilon, eps0, classes[c].eps_k,
                                    classes[c].gamma_k, class_sizes[c]) < 0) {
      eps0 = std::nextafter(eps0, 0.0);
    }
  }
  return eps0;
}

TransitionPlan UpdateTransition(std::vector<WeightCounts> support, int j_star,
                                const std::vector<double>& g_values,
                                double eps0, double lambda,
                                double log_s_cardinality) {
  const int size = static_cast<int>(support.size());
  const double m = size - 1;
  const double up = std::exp(eps0);
  const double down = std::exp(-eps0);
  TransitionPlan plan;
  plan.support = std::move(support);
  plan.j_star = j_star;
  plan.lambda = lambda;
  plan.log_s_cardinality = log_s_cardinality;
  plan.matrix = Matrix::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    const bool nonnegative = g_values[i] >= 0;
    const double stay = nonnegative ? 1.0 / (1.0 + m * up)
                                    : 1.0 / (1.0 + m * down);
    const double off = (nonnegative ? up : down) * stay;
    for (int j = 0; j < size; ++j) plan.matrix(i, j) = j == j_star ? stay : off;
  }
  return plan;
}

double TransitionObjective(const TransitionPlan& plan,
                           const std::vector<double>& g_values) {
  double acc = 0.0;
  for (size_t i = 0; i < g_values.size(); ++i) {
    acc += plan.matrix(static_cast<Eigen::Index>(i), plan.j_star) * g_values[i];
  }
  return acc;
}

absl::StatusOr<NoisePlan> Plan(const GmmParams& fit, const AdjacencySet& adj,
                               const PrivacySpec& spec,
                               const PlanOptions& options) {
  const int k = fit.k();
  if (adj.k() != k || adj.class_sizes != fit.weights.counts) {
    return MakeError(ErrorCode::kSchemaMismatch,
                     "adjacency set was not built from this model");
  }
  if (!(options.eps0_frac > 0) || options.max_iter < 1) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "eps0_frac must be positive and max_iter at least 1");
  }
  const bool feature =
      spec.mode.variant == AdjacencyVariant::kFeatureChange;
  const double epsilon = spec.epsilon;
  const std::vector<int64_t>& sizes = fit.weights.counts;
  const int keep =
      options.keep_constraints > 0 ? options.keep_constraints : 2 * fit.d();

  NoisePlan plan;
  plan.epsilon = epsilon;
  plan.delta = spec.delta;
  plan.lambda = spec.lambda;
  plan.mode = spec.mode;
  plan.uniform_bound = adj.uniform_bound;
  plan.eps0 = feature ? 0.0 : options.eps0_frac * epsilon;
  plan.classes.assign(k, ClassNoise{});
  std::vector<double> eps_k(
      k, feature ? epsilon / 2.0 : options.eps0_frac * epsilon);
  for (int c = 0; c < k; ++c) {
    const double room = epsilon - plan.eps0 - eps_k[c];
    if (!(room > 0)) {
      return MakeError(
          ErrorCode::kInfeasibleBudget,
          absl::StrCat("class ", c + 1, ": initial split leaves ", room,
                       " for the covariance budget"));
    }
  }

  std::vector<WeightCounts> support;
  double log_s = 0.0;
  if (!feature) {
    support.push_back(fit.weights);
    support.insert(support.end(), adj.weight_neighbors.begin(),
                   adj.weight_neighbors.end());
    log_s = LatticeCardinality(fit.n(), k).log_value;
  }
  const double constant = ExpectedKlConstant(fit.d());

  std::vector<std::optional<SymMatrix>> hints(k);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    DPGMM_ASSIGN_OR_RETURN(std::vector<double> gammas,
                           UpdateGamma(fit, epsilon, plan.eps0, eps_k));
    for (int c = 0; c < k; ++c) {
      double e = epsilon - plan.eps0 -
                 3.0 * gammas[c] / (2.0 * static_cast<double>(sizes[c]));
      while (BudgetMargin(epsilon, plan.eps0, e, gammas[c], sizes[c]) < 0) {
        e = std::nextafter(e, 0.0);
      }
      eps_k[c] = e;
      plan.classes[c].eps_k = e;
      plan.classes[c].gamma_k = gammas[c];
    }

    std::vector<absl::StatusOr<SymMatrix>> solved(
        k, absl::StatusOr<SymMatrix>(absl::UnknownError("unsolved")));
    ParallelFor(static_cast<size_t>(k), [&](size_t c) {
      solved[c] = SolveClass(fit, adj, static_cast<int>(c), eps_k[c],
                             spec.delta, options.sdp_tol, keep, hints[c]);
    });
    std::vector<SymMatrix> gamma_invs;
    for (int c = 0; c < k; ++c) {
      DPGMM_RETURN_IF_ERROR(solved[c].status());
      DPGMM_ASSIGN_OR_RETURN(
          const bool keep_previous,
          PreviousIsNoWorse(fit, adj, c, eps_k[c], spec.delta, hints[c],
                            *solved[c]));
      if (!keep_previous) hints[c] = *solved[c];
      plan.classes[c].gamma_inv = *hints[c];
      gamma_invs.push_back(*hints[c]);
    }

    DPGMM_ASSIGN_OR_RETURN(std::vector<double> costs,
                           ComponentCosts(fit, gammas, gamma_invs));
    double objective;
    if (feature) {
      objective = GValueFromCosts(fit.weights, fit.weights, costs) - constant;
    } else {
      std::vector<double> g;
      g.reserve(support.size());
      for (const WeightCounts& s : support) {
        g.push_back(GValueFromCosts(s, fit.weights, costs));
      }
      plan.eps0 = UpdateEps0(epsilon, plan.classes, sizes);
      plan.transition = UpdateTransition(support, 0, g, plan.eps0,
                                         spec.lambda, log_s);
      objective = TransitionObjective(*plan.transition, g) - constant;
    }
    plan.objective_trace.push_back(objective);
    plan.iterations = iter;
    if (iter > 1) {
      const double prev = plan.objective_trace[iter - 2];
      if (std::abs(prev - objective) < options.early_stop) break;
    }
  }
  return plan;
}

absl::StatusOr<double> WorstQuadraticForm(const SymMatrix& gamma_inv,
                                          const AdjacencySet& adj, int cls) {
  DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor chol, Cholesky(gamma_inv));
  double worst = 0.0;
  for (const Vector& d : adj.mean_diffs[cls]) {
    worst = std::max(worst, chol.InverseQuadraticForm(d));
  }
  const double radius = adj.isotropic_radius[cls];
  if (radius > 0) {
    // max over ||d|| <= r of d^T Gamma d is r^2 / lambda_min(Gamma^{-1}).
    const double lambda_min = JacobiEigen(gamma_inv).values(0);
    worst = std::max(worst, radius * radius / lambda_min);
  }
  return worst;
}

double LedgerReport::worst_budget_margin() const {
  double worst = std::numeric_limits<double>::infinity();
  for (double m : budget_margins) worst = std::min(worst, m);
  return worst;
}

double LedgerReport::worst_schur_margin() const {
  double worst = std::numeric_limits<double>::infinity();
  for (double m : schur_margins) worst = std::min(worst, m);
  return worst;
}

absl::StatusOr<LedgerReport> VerifyLedger(const NoisePlan& plan,
                                          const AdjacencySet& adj,
                                          const PrivacySpec& spec) {
  if (plan.k() != adj.k()) {
    return MakeError(ErrorCode::kSchemaMismatch,
                     "plan and adjacency set disagree on the class count");
  }
  const bool feature = plan.mode.variant == AdjacencyVariant::kFeatureChange;
  const double log_term = Log2OverDelta(spec.delta);
  LedgerReport report;
  for (int c = 0; c < plan.k(); ++c) {
    const ClassNoise& noise = plan.classes[c];
    const double eps0 = feature ? 0.0 : plan.eps0;
    const double budget = BudgetMargin(spec.epsilon, eps0, noise.eps_k,
                                       noise.gamma_k, adj.class_sizes[c]);
    report.budget_margins.push_back(budget);
    report.budget_ok = report.budget_ok && budget >= 0;

    DPGMM_ASSIGN_OR_RETURN(const double worst,
                           WorstQuadraticForm(noise.gamma_inv, adj, c));
    const double bound = noise.eps_k * noise.eps_k / (2.0 * log_term);
    report.schur_margins.push_back(bound - worst);
    report.schur_ok = report.schur_ok && bound - worst >= 0;

    if (feature && adj.mode.clip_bound.has_value()) {
      const double b = *adj.mode.clip_bound;
      const double nk = static_cast<double>(adj.class_sizes[c]);
      const double gamma_norm = 1.0 / JacobiEigen(noise.gamma_inv).values(0);
      const double margin = 1.0 - 8.0 * b * b * log_term * gamma_norm /
                                       (nk * nk * noise.eps_k * noise.eps_k);
      report.feature_margins.push_back(margin);
      report.feature_ok = report.feature_ok && margin >= 0;
    }
  }

  if (plan.transition.has_value()) {
    const TransitionPlan& tp = *plan.transition;
    const Matrix& f = tp.matrix;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      report.row_sum_error =
          std::max(report.row_sum_error, std::abs(f.row(i).sum() - 1.0));
      for (Eigen::Index j = 0; j < f.cols(); ++j) {
        if (j == tp.j_star) continue;
        const double ratio = std::abs(std::log(f(i, tp.j_star) / f(i, j)));
        report.ratio_error =
            std::max(report.ratio_error, std::abs(ratio - plan.eps0));
      }
    }
    const double scale = std::max(1.0, plan.eps0);
    report.ratio_ok = report.ratio_error <= kRatioTolerance * scale &&
                      report.row_sum_error <= kRatioTolerance;
  }
  return report;
}

}  // namespace dpgmm
