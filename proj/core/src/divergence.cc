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

#include "dpgmm/divergence.h"

#include <cmath>
#include <numbers>

#include "dpgmm/mechanisms.h"
#include "dpgmm/parallel.h"
#include "dpgmm/random.h"
#include "dpgmm/status.h"

namespace dpgmm {
namespace {

double FrobeniusInner(const SymMatrix& a, const SymMatrix& b) {
  return a.matrix().cwiseProduct(b.matrix()).sum();
}

double LogBinomial(double n, double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

// P(count_1 = j), j = 1..n-k+1, for a uniform element of the lattice with
// total n and k >= 2 parts. Index 0 of the result is j = 1.
std::vector<double> UniformCountMarginal(int64_t n, int k) {
  std::vector<double> p;
  const double log_total = LogBinomial(static_cast<double>(n - 1), k - 1);
  for (int64_t j = 1; j <= n - k + 1; ++j) {
    p.push_back(std::exp(
        LogBinomial(static_cast<double>(n - j - 1), k - 2) - log_total));
  }
  return p;
}

double PairwiseSum(const std::vector<double>& v, size_t lo, size_t hi) {
  if (hi - lo <= 8) {
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) acc += v[i];
    return acc;
  }
  const size_t mid = lo + (hi - lo) / 2;
  return PairwiseSum(v, lo, mid) + PairwiseSum(v, mid, hi);
}

}  // namespace

absl::StatusOr<std::vector<double>> ComponentCosts(
    const GmmParams& fit, const std::vector<double>& gammas,
    const std::vector<SymMatrix>& gamma_invs) {
  const double d = fit.d();
  std::vector<double> costs(fit.k());
  for (int c = 0; c < fit.k(); ++c) {
    if (!(gammas[c] > 0)) {
      return MakeError(ErrorCode::kDomainError, "gamma_k must be positive");
    }
    DPGMM_ASSIGN_OR_RETURN(SymMatrix sigma_inv, InverseSpd(fit.covs[c]));
    costs[c] = 0.5 * (d * std::log(gammas[c]) +
                      (d + 1) / gammas[c] * sigma_inv.trace() +
                      FrobeniusInner(sigma_inv, gamma_invs[c]));
  }
  return costs;
}

double GValueFromCosts(const WeightCounts& pi_tilde, const WeightCounts& pi,
                       const std::vector<double>& costs) {
  double g = 0.0;
  for (int c = 0; c < pi.k(); ++c) {
    const double pt = pi_tilde.weight(c);
    g += pt * (std::log(pt / pi.weight(c)) + costs[c]);
  }
  return g;
}

absl::StatusOr<double> GValue(const WeightCounts& pi_tilde,
                              const GmmParams& fit,
                              const std::vector<double>& gammas,
                              const std::vector<SymMatrix>& gamma_invs) {
  DPGMM_ASSIGN_OR_RETURN(std::vector<double> costs,
                         ComponentCosts(fit, gammas, gamma_invs));
  return GValueFromCosts(pi_tilde, fit.weights, costs);
}

double ExpectedKlConstant(int d) {
  return 0.5 * (d * std::numbers::ln2 + *MultivariateDigamma(0.5 * (d + 1), d));
}

absl::StatusOr<KlReport> ExpectedKl(const GmmParams& fit,
                                    const NoisePlan& plan) {
  if (plan.k() != fit.k()) {
    return MakeError(ErrorCode::kSchemaMismatch,
                     "plan and model disagree on the number of classes");
  }
  const int k = fit.k();
  std::vector<double> gammas;
  std::vector<SymMatrix> gamma_invs;
  for (const ClassNoise& noise : plan.classes) {
    gammas.push_back(noise.gamma_k);
    gamma_invs.push_back(noise.gamma_inv);
  }
  DPGMM_ASSIGN_OR_RETURN(std::vector<double> costs,
                         ComponentCosts(fit, gammas, gamma_invs));

  KlReport report;
  report.constant_term = ExpectedKlConstant(fit.d());
  report.per_component_terms.assign(k, 0.0);

  if (!plan.transition.has_value()) {
    for (int c = 0; c < k; ++c) {
      report.per_component_terms[c] = fit.weights.weight(c) * costs[c];
    }
    double sum = 0.0;
    for (double t : report.per_component_terms) sum += t;
    report.analytic_expected_kl = sum - report.constant_term;
    report.restricted_expected_kl = report.analytic_expected_kl;
    return report;
  }

  const TransitionPlan& tp = *plan.transition;
  const Vector pmf = tp.SamplingPmf();
  const double lambda = tp.lambda;
  report.lambda = lambda;

  double restricted_g = 0.0;
  double restricted_weight = 0.0;
  std::vector<double> restricted_mass(k, 0.0);
  for (size_t i = 0; i < tp.support.size(); ++i) {
    const WeightCounts& pt = tp.support[i];
    restricted_g += pmf(i) * GValueFromCosts(pt, fit.weights, costs);
    for (int c = 0; c < k; ++c) {
      const double w = pt.weight(c);
      restricted_weight += pmf(i) * w * std::log(w / fit.weights.weight(c));
      restricted_mass[c] += pmf(i) * w;
    }
  }

  const int64_t n = fit.n();
  std::vector<double> uniform_weight(k, 0.0);
  if (k == 1) {
    uniform_weight[0] = 0.0;
  } else {
    const std::vector<double> marginal = UniformCountMarginal(n, k);
    for (int c = 0; c < k; ++c) {
      const double nk = static_cast<double>(fit.weights.counts[c]);
      double acc = 0.0;
      for (size_t idx = 0; idx < marginal.size(); ++idx) {
        const double j = static_cast<double>(idx + 1);
        acc += marginal[idx] * (j / n) * std::log(j / nk);
      }
      uniform_weight[c] = acc;
    }
  }
  double uniform_g = 0.0;
  double uniform_weight_sum = 0.0;
  for (int c = 0; c < k; ++c) {
    uniform_g += uniform_weight[c] + costs[c] / k;
    uniform_weight_sum += uniform_weight[c];
  }
  report.uniform_branch_g = uniform_g;

  report.weight_term =
      (1 - lambda) * restricted_weight + lambda * uniform_weight_sum;
  double component_sum = 0.0;
  for (int c = 0; c < k; ++c) {
    report.per_component_terms[c] =
        ((1 - lambda) * restricted_mass[c] + lambda / k) * costs[c];
    component_sum += report.per_component_terms[c];
  }
  report.analytic_expected_kl =
      report.weight_term + component_sum - report.constant_term;
  report.restricted_expected_kl = restricted_g - report.constant_term;
  return report;
}

absl::StatusOr<double> RealizedKl(const GmmParams& released,
                                  const GmmParams& fit) {
  if (released.k() != fit.k() || released.d() != fit.d()) {
    return MakeError(ErrorCode::kSchemaMismatch,
                     "released model and fit have different shapes");
  }
  const double d = fit.d();
  double kl = 0.0;
  for (int c = 0; c < fit.k(); ++c) {
    const double pt = released.weights.weight(c);
    DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor chol, Cholesky(fit.covs[c]));
    DPGMM_ASSIGN_OR_RETURN(SymMatrix sigma_inv, InverseSpd(fit.covs[c]));
    DPGMM_ASSIGN_OR_RETURN(double logdet_fit, LogDetSpd(fit.covs[c]));
    DPGMM_ASSIGN_OR_RETURN(double logdet_rel, LogDetSpd(released.covs[c]));
    const Vector diff = released.means[c] - fit.means[c];
    const double gaussian =
        0.5 * (chol.InverseQuadraticForm(diff) - d - (logdet_rel - logdet_fit) +
               FrobeniusInner(sigma_inv, released.covs[c]));
    kl += pt * (std::log(pt / fit.weights.weight(c)) + gaussian);
  }
  return kl;
}

absl::StatusOr<McEstimate> MonteCarloExpectedKl(const GmmParams& fit,
                                                const NoisePlan& plan,
                                                int64_t trials, uint64_t seed) {
  if (trials < 2) {
    return MakeError(ErrorCode::kInvalidArgument, "need at least 2 trials");
  }
  const size_t m = static_cast<size_t>(trials);
  std::vector<double> values(m, 0.0);
  std::vector<absl::Status> errors(m);
  const uint64_t base = Mix64(seed);
  ParallelFor(m, [&](size_t t) {
    absl::StatusOr<ReleasedGmm> released =
        Release(fit, plan, Mix64(base + t));
    if (!released.ok()) {
      errors[t] = released.status();
      return;
    }
    absl::StatusOr<double> kl = RealizedKl(released->params, fit);
    if (!kl.ok()) {
      errors[t] = kl.status();
      return;
    }
    values[t] = *kl;
  });
  for (const absl::Status& s : errors) DPGMM_RETURN_IF_ERROR(s);

  const double mean = PairwiseSum(values, 0, m) / static_cast<double>(m);
  std::vector<double> squares(m);
  for (size_t t = 0; t < m; ++t) {
    squares[t] = (values[t] - mean) * (values[t] - mean);
  }
  const double variance =
      PairwiseSum(squares, 0, m) / static_cast<double>(m - 1);
  return McEstimate{mean, std::sqrt(variance / static_cast<double>(m))};
}

}  // namespace dpgmm
