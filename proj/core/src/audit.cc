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

#include "dpgmm/audit.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "boost/math/distributions/chi_squared.hpp"
#include "dpgmm/mechanisms.h"
#include "dpgmm/planner.h"
#include "dpgmm/random.h"
#include "dpgmm/status.h"

namespace dpgmm {
namespace {

// Probability that a uniform lattice draw equals one given support element:
// 1 / |S| when the element lies on the lattice of the fitted dataset.
double UniformAtom(const TransitionPlan& tp, const WeightCounts& element) {
  const WeightCounts& center = tp.support[tp.j_star];
  if (!element.InLattice(center.total())) return 0.0;
  return std::exp(-tp.log_s_cardinality);
}

}  // namespace

WeightAudit AuditWeightMechanism(const TransitionPlan& tp, double eps0) {
  WeightAudit out;
  out.declared = eps0;
  const Matrix& f = tp.matrix;
  const int size = static_cast<int>(f.rows());
  Vector column_sums = f.colwise().sum().transpose();
  for (int i = 0; i < size; ++i) {
    const double atom = tp.lambda * UniformAtom(tp, tp.support[i]);
    const double p_star =
        (1 - tp.lambda) * f(i, tp.j_star) / column_sums(tp.j_star) + atom;
    for (int j = 0; j < size; ++j) {
      if (j == tp.j_star) continue;
      out.raw_ratio = std::max(
          out.raw_ratio, std::abs(std::log(f(i, tp.j_star) / f(i, j))));
      const double p_j = (1 - tp.lambda) * f(i, j) / column_sums(j) + atom;
      out.normalized_ratio =
          std::max(out.normalized_ratio, std::abs(std::log(p_star / p_j)));
    }
  }
  return out;
}

absl::StatusOr<std::vector<GaussianClassAudit>> AuditGaussian(
    const NoisePlan& plan, const AdjacencySet& adj, const PrivacySpec& spec) {
  if (plan.k() != adj.k()) {
    return MakeError(ErrorCode::kSchemaMismatch,
                     "plan and adjacency set disagree on the class count");
  }
  const double log_term = std::log(2.0 / spec.delta);
  std::vector<GaussianClassAudit> out;
  for (int c = 0; c < plan.k(); ++c) {
    GaussianClassAudit audit;
    DPGMM_ASSIGN_OR_RETURN(
        audit.worst_quadratic_form,
        WorstQuadraticForm(plan.classes[c].gamma_inv, adj, c));
    const double eps_k = plan.classes[c].eps_k;
    audit.bound = eps_k * eps_k / (2.0 * log_term);
    audit.margin = audit.bound - audit.worst_quadratic_form;
    out.push_back(audit);
  }
  return out;
}

FrequencyAudit AuditEmpiricalFrequencies(const TransitionPlan& tp,
                                         int64_t draws, uint64_t seed) {
  const int size = static_cast<int>(tp.support.size());
  FrequencyAudit out;
  out.draws = draws;
  out.observed.assign(size + 1, 0);

  const Vector pmf = tp.SamplingPmf();
  double support_uniform = 0.0;
  for (int i = 0; i < size; ++i) {
    const double atom = UniformAtom(tp, tp.support[i]);
    support_uniform += atom;
    out.expected_probability.push_back((1 - tp.lambda) * pmf(i) +
                                       tp.lambda * atom);
  }
  out.expected_probability.push_back(tp.lambda *
                                     std::max(0.0, 1.0 - support_uniform));

  RandomStream rng(seed);
  for (int64_t t = 0; t < draws; ++t) {
    const WeightDraw draw = SampleWeightDraw(tp, rng);
    ++out.observed[draw.support_index >= 0 ? draw.support_index : size];
  }

  int buckets = 0;
  for (int b = 0; b <= size; ++b) {
    const double expected = out.expected_probability[b] * draws;
    if (expected <= 0) {
      if (out.observed[b] > 0) out.passed = false;
      continue;
    }
    const double diff = out.observed[b] - expected;
    out.statistic += diff * diff / expected;
    ++buckets;
  }
  out.degrees_of_freedom = std::max(0, buckets - 1);
  if (out.degrees_of_freedom == 0) {
    out.critical_value = 0.0;
    out.passed = out.passed && out.statistic == 0.0;
    return out;
  }
  const boost::math::chi_squared dist(out.degrees_of_freedom);
  out.critical_value =
      boost::math::quantile(boost::math::complement(dist, kFrequencySignificance));
  out.passed = out.passed && out.statistic <= out.critical_value;
  return out;
}

absl::StatusOr<AuditReport> Audit(const NoisePlan& plan,
                                  const AdjacencySet& adj,
                                  const PrivacySpec& spec,
                                  const AuditOptions& options) {
  AuditReport report;
  report.strict = options.strict;
  report.admissible_flips = adj.admissible_flips;
  report.excluded_flips = adj.excluded_flips;
  if (adj.excluded_flips > 0) {
    report.notes.push_back(absl::StrCat(
        adj.excluded_flips,
        " neighbors that would empty a class are outside the guarantee"));
  }

  DPGMM_ASSIGN_OR_RETURN(report.gaussian, AuditGaussian(plan, adj, spec));
  for (int c = 0; c < plan.k(); ++c) {
    if (report.gaussian[c].margin < 0) {
      report.failures.push_back(absl::StrCat(
          "class ", c + 1, ": Gaussian margin ", report.gaussian[c].margin));
    }
    const bool feature =
        plan.mode.variant == AdjacencyVariant::kFeatureChange;
    const double margin = BudgetMargin(
        spec.epsilon, feature ? 0.0 : plan.eps0, plan.classes[c].eps_k,
        plan.classes[c].gamma_k, adj.class_sizes[c]);
    report.wishart_budget_margins.push_back(margin);
    if (margin < 0) {
      report.failures.push_back(
          absl::StrCat("class ", c + 1, ": budget margin ", margin));
    }
  }

  if (!plan.transition.has_value()) {
    report.notes.push_back("weights released unperturbed");
    return report;
  }
  const TransitionPlan& tp = *plan.transition;
  report.weight = AuditWeightMechanism(tp, plan.eps0);
  const WeightAudit& w = *report.weight;
  if (tp.m() > 0 &&
      std::abs(w.raw_ratio - plan.eps0) > kRatioTolerance * std::max(1.0, plan.eps0)) {
    report.failures.push_back(absl::StrCat("raw ratio ", w.raw_ratio,
                                           " differs from eps0 ", plan.eps0));
  }
  const double limit = options.strict ? plan.eps0 : 2.0 * plan.eps0;
  if (w.normalized_ratio > limit + 1e-9) {
    report.failures.push_back(absl::StrCat(
        "normalized ratio ", w.normalized_ratio, " exceeds ", limit));
    if (options.strict) {
      report.notes.push_back(absl::StrCat(
          "re-plan with eps0 = ", plan.eps0 / 2.0,
          " in the transition block to meet the strict bound"));
    }
  }
  report.notes.push_back(
      "the weight guarantee covers pairs involving the fitted weights; "
      "other neighbor pairs are not certified");

  report.frequency =
      AuditEmpiricalFrequencies(tp, options.draws, options.seed);
  if (!report.frequency->passed) {
    report.failures.push_back(absl::StrCat(
        "chi-square statistic ", report.frequency->statistic,
        " exceeds critical value ", report.frequency->critical_value));
  }
  return report;
}

}  // namespace dpgmm
