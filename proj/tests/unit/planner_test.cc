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

#include <cmath>
#include <random>
#include <vector>

#include "Eigen/Dense"
#include "dpgmm/adjacency.h"
#include "dpgmm/noise_plan.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "transition_oracle.h"

namespace dpgmm {
namespace {

using ::dpgmm::testing::RandomDataset;
using ::dpgmm::testing::RandomSpd;
using ::testing::HasSubstr;

std::vector<WeightCounts> DummySupport(int size) {
  std::vector<WeightCounts> support;
  for (int i = 0; i < size; ++i) {
    support.push_back(WeightCounts::Create({i + 1, 100}).value());
  }
  return support;
}

std::vector<double> RandomG(int size, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<double> g(size);
  for (double& v : g) v = normal(gen);
  return g;
}

struct Instance {
  LabeledDataset data;
  GmmParams fit;
};

Instance MakeInstance(int k, int d, int n, std::mt19937_64& gen) {
  LabeledDataset data = RandomDataset(k, d, n, gen, 5);
  GmmParams fit = FitGmm(data).value();
  return Instance{std::move(data), std::move(fit)};
}

PrivacySpec Spec(double epsilon, AdjacencyMode mode = {}) {
  return PrivacySpec::Create(epsilon, 1e-5, 1e-3, mode).value();
}

TEST(BudgetMarginTest, SubtractsEveryTerm) {
  EXPECT_DOUBLE_EQ(BudgetMargin(1.0, 0.2, 0.3, 10.0, 100), 0.5 - 0.15);
}

TEST(UpdateGammaTest, TakesTheSmallerOfTraceAndCap) {
  GmmParams fit;
  fit.weights = WeightCounts::Create({10, 1000}).value();
  fit.means = {Vector::Zero(2), Vector::Zero(2)};
  fit.covs = {SymMatrix::Identity(2), SymMatrix::Identity(2)};
  DPGMM_ASSERT_OK_AND_ASSIGN(std::vector<double> g,
                             UpdateGamma(fit, 1.0, 0.2, {0.3, 0.3}));
  // (d + 1) / d tr(I) = 3 is below both caps 10 / 3 and 1000 / 3.
  EXPECT_DOUBLE_EQ(g[0], 3.0);
  EXPECT_DOUBLE_EQ(g[1], 3.0);

  fit.weights = WeightCounts::Create({2, 1000}).value();
  DPGMM_ASSERT_OK_AND_ASSIGN(g, UpdateGamma(fit, 1.0, 0.2, {0.3, 0.3}));
  EXPECT_DOUBLE_EQ(g[0], 2.0 * 2.0 * 0.5 / 3.0);
  EXPECT_DOUBLE_EQ(g[1], 3.0);
}

TEST(UpdateGammaTest, InfeasibleBudgetNamesTheClass) {
  GmmParams fit;
  fit.weights = WeightCounts::Create({10, 10, 10}).value();
  fit.means.assign(3, Vector::Zero(1));
  fit.covs.assign(3, SymMatrix::Identity(1));
  absl::StatusOr<std::vector<double>> g =
      UpdateGamma(fit, 1.0, 0.5, {0.1, 0.5, 0.1});
  EXPECT_EQ(ErrorCodeOf(g), ErrorCode::kInfeasibleBudget);
  EXPECT_THAT(std::string(g.status().message()), HasSubstr("class 2"));
}

TEST(UpdateEps0Test, LeavesEveryBudgetMarginNonnegative) {
  std::mt19937_64 gen(70);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + trial % 6;
    const double epsilon = 0.1 + 4.0 * unit(gen);
    std::vector<ClassNoise> classes(k);
    std::vector<int64_t> sizes(k);
    for (int c = 0; c < k; ++c) {
      sizes[c] = 2 + static_cast<int64_t>(500 * unit(gen));
      classes[c].eps_k = 0.5 * epsilon * unit(gen);
      classes[c].gamma_k = sizes[c] * 0.3 * epsilon * unit(gen);
    }
    const double eps0 = UpdateEps0(epsilon, classes, sizes);
    for (int c = 0; c < k; ++c) {
      EXPECT_GE(BudgetMargin(epsilon, eps0, classes[c].eps_k,
                             classes[c].gamma_k, sizes[c]),
                0.0);
    }
  }
}

TEST(UpdateTransitionTest, RowsAreStochasticWithExactRatios) {
  std::mt19937_64 gen(71);
  for (int m : {1, 3, 10}) {
    const std::vector<double> g = RandomG(m + 1, gen);
    const double eps0 = 0.7;
    TransitionPlan plan = UpdateTransition(DummySupport(m + 1), 0, g, eps0,
                                           1e-3, 5.0);
    EXPECT_EQ(plan.m(), m);
    for (int i = 0; i <= m; ++i) {
      EXPECT_NEAR(plan.matrix.row(i).sum(), 1.0, 1e-15);
      for (int j = 1; j <= m; ++j) {
        EXPECT_NEAR(std::abs(std::log(plan.matrix(i, 0) / plan.matrix(i, j))),
                    eps0, 1e-13);
      }
    }
  }
}

TEST(UpdateTransitionTest, BeatsRandomFeasibleMatrices) {
  std::mt19937_64 gen(72);
  std::uniform_real_distribution<double> eps_dist(0.01, 3.0);
  std::uniform_int_distribution<int> m_dist(1, 12);
  for (int instance = 0; instance < 20; ++instance) {
    const int m = m_dist(gen);
    const double eps0 = eps_dist(gen);
    const std::vector<double> g = RandomG(m + 1, gen);
    const TransitionPlan plan =
        UpdateTransition(DummySupport(m + 1), 0, g, eps0, 1e-3, 5.0);
    const double best = TransitionObjective(plan, g);
    for (int r = 0; r < 1000; ++r) {
      const Eigen::MatrixXd f =
          oracle::RandomFeasibleTransition(m + 1, m, eps0, gen);
      EXPECT_LE(best, oracle::TransitionCost(f, g) + 1e-12);
    }
  }
}

TEST(UpdateTransitionTest, ObjectiveMatchesClosedFormValue) {
  std::mt19937_64 gen(73);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 7;
    const std::vector<double> g = RandomG(m + 1, gen);
    double a = 0.0;
    double b = 0.0;
    for (double v : g) (v >= 0 ? a : b) += v;
    const double eps0 = 0.1 * (trial + 1);
    const TransitionPlan plan =
        UpdateTransition(DummySupport(m + 1), 0, g, eps0, 1e-3, 5.0);
    EXPECT_NEAR(TransitionObjective(plan, g),
                oracle::TransitionValue(a, b, m, eps0), 1e-12);
  }
}

TEST(TransitionValueTest, NonIncreasingInEps0) {
  std::mt19937_64 gen(74);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = 10.0 * unit(gen);
    const double b = -10.0 * unit(gen);
    const int m = 1 + static_cast<int>(50 * unit(gen));
    double prev = oracle::TransitionValue(a, b, m, 0.0);
    for (int i = 1; i < 100; ++i) {
      const double eps0 = 5.0 * i / 99.0;
      const double value = oracle::TransitionValue(a, b, m, eps0);
      EXPECT_LE(value, prev + 1e-12);
      prev = value;
    }
  }
}

TEST(PlanTest, LabelFlipPlanPassesTheLedger) {
  std::mt19937_64 gen(75);
  for (int trial = 0; trial < 5; ++trial) {
    const int k = 2 + trial % 3;
    const int d = 1 + trial % 3;
    Instance inst = MakeInstance(k, d, 120, gen);
    const AdjacencySet adj = EnumerateLabelFlip(inst.data, inst.fit);
    const PrivacySpec spec = Spec(1.0 + trial);
    DPGMM_ASSERT_OK_AND_ASSIGN(NoisePlan plan, Plan(inst.fit, adj, spec));
    ASSERT_TRUE(plan.transition.has_value());
    EXPECT_EQ(plan.transition->m(),
              static_cast<int>(adj.weight_neighbors.size()));
    DPGMM_ASSERT_OK_AND_ASSIGN(LedgerReport ledger,
                               VerifyLedger(plan, adj, spec));
    EXPECT_TRUE(ledger.passed());
    EXPECT_GE(ledger.worst_budget_margin(), 0.0);
    EXPECT_GE(ledger.worst_schur_margin(), 0.0);
    for (size_t i = 1; i < plan.objective_trace.size(); ++i) {
      EXPECT_LE(plan.objective_trace[i], plan.objective_trace[i - 1] + 1e-9);
    }
    EXPECT_LE(plan.iterations, PlanOptions{}.max_iter);
    EXPECT_EQ(static_cast<int>(plan.objective_trace.size()), plan.iterations);
  }
}

TEST(PlanTest, ExtraIterationsNeverRaiseTheObjective) {
  std::mt19937_64 gen(83);
  PlanOptions options;
  options.early_stop = 0.0;
  options.max_iter = 6;
  for (int trial = 0; trial < 8; ++trial) {
    Instance inst = MakeInstance(2 + trial % 4, 1 + trial % 3, 150, gen);
    const AdjacencySet adj = EnumerateLabelFlip(inst.data, inst.fit);
    const PrivacySpec spec = Spec(0.5 + 0.5 * trial);
    DPGMM_ASSERT_OK_AND_ASSIGN(NoisePlan plan,
                               Plan(inst.fit, adj, spec, options));
    ASSERT_EQ(plan.iterations, 6);
    for (size_t i = 1; i < plan.objective_trace.size(); ++i) {
      EXPECT_LE(plan.objective_trace[i], plan.objective_trace[i - 1]);
    }
  }
}

TEST(PlanTest, RemoveOnePlanPassesTheLedger) {
  std::mt19937_64 gen(76);
  Instance inst = MakeInstance(3, 2, 90, gen);
  DPGMM_ASSERT_OK_AND_ASSIGN(
      AdjacencyMode mode,
      AdjacencyMode::Create(AdjacencyVariant::kRemoveOne, std::nullopt));
  DPGMM_ASSERT_OK_AND_ASSIGN(AdjacencySet adj,
                             EnumerateAdjacency(inst.data, inst.fit, mode));
  const PrivacySpec spec = Spec(2.0, mode);
  DPGMM_ASSERT_OK_AND_ASSIGN(NoisePlan plan, Plan(inst.fit, adj, spec));
  DPGMM_ASSERT_OK_AND_ASSIGN(LedgerReport ledger,
                             VerifyLedger(plan, adj, spec));
  EXPECT_TRUE(ledger.passed());
}

TEST(PlanTest, FeatureChangeSkipsTheTransitionAndMeetsTheBoundExactly) {
  std::mt19937_64 gen(77);
  Instance raw = MakeInstance(3, 3, 150, gen);
  const double b = 2.0;
  LabeledDataset data = ClipDataset(raw.data, b);
  DPGMM_ASSERT_OK_AND_ASSIGN(GmmParams fit, FitGmm(data));
  DPGMM_ASSERT_OK_AND_ASSIGN(
      AdjacencyMode mode,
      AdjacencyMode::Create(AdjacencyVariant::kFeatureChange, b));
  DPGMM_ASSERT_OK_AND_ASSIGN(AdjacencySet adj,
                             EnumerateAdjacency(data, fit, mode));
  DPGMM_ASSERT_OK_AND_ASSIGN(adj, ApplyUniformBound(data, adj, b));
  const PrivacySpec spec = Spec(1.0, mode);
  DPGMM_ASSERT_OK_AND_ASSIGN(NoisePlan plan, Plan(fit, adj, spec));
  EXPECT_FALSE(plan.transition.has_value());
  EXPECT_EQ(plan.eps0, 0.0);
  DPGMM_ASSERT_OK_AND_ASSIGN(LedgerReport ledger,
                             VerifyLedger(plan, adj, spec));
  EXPECT_TRUE(ledger.passed());
  for (int c = 0; c < plan.k(); ++c) {
    const double bound = plan.classes[c].eps_k * plan.classes[c].eps_k /
                         (2.0 * std::log(2.0 / spec.delta));
    EXPECT_GE(ledger.schur_margins[c], 0.0);
    EXPECT_LE(ledger.schur_margins[c], 1e-9 * bound);
    // Isotropic covariance.
    const SymMatrix& gi = plan.classes[c].gamma_inv;
    EXPECT_NEAR((gi.matrix() - gi(0, 0) * Matrix::Identity(3, 3)).norm(), 0.0,
                1e-15 * gi(0, 0));
  }
}

TEST(PlanTest, RejectsAForeignAdjacencySet) {
  std::mt19937_64 gen(78);
  Instance a = MakeInstance(2, 2, 40, gen);
  Instance b = MakeInstance(2, 2, 50, gen);
  const AdjacencySet adj = EnumerateLabelFlip(b.data, b.fit);
  EXPECT_EQ(ErrorCodeOf(Plan(a.fit, adj, Spec(1.0))),
            ErrorCode::kSchemaMismatch);
}

TEST(PlanTest, HalfSplitLeavesNoCovarianceBudget) {
  std::mt19937_64 gen(79);
  Instance inst = MakeInstance(2, 2, 40, gen);
  const AdjacencySet adj = EnumerateLabelFlip(inst.data, inst.fit);
  PlanOptions options;
  options.eps0_frac = 0.5;
  absl::StatusOr<NoisePlan> plan = Plan(inst.fit, adj, Spec(1.0), options);
  EXPECT_EQ(ErrorCodeOf(plan), ErrorCode::kInfeasibleBudget);
  EXPECT_THAT(std::string(plan.status().message()), HasSubstr("class 1"));
}

TEST(VerifyLedgerTest, DetectsAShrunkenCovariance) {
  std::mt19937_64 gen(80);
  Instance inst = MakeInstance(2, 2, 60, gen);
  const AdjacencySet adj = EnumerateLabelFlip(inst.data, inst.fit);
  const PrivacySpec spec = Spec(1.0);
  DPGMM_ASSERT_OK_AND_ASSIGN(NoisePlan plan, Plan(inst.fit, adj, spec));
  plan.classes[1].gamma_inv = SymMatrix(plan.classes[1].gamma_inv.matrix() * 0.5);
  DPGMM_ASSERT_OK_AND_ASSIGN(LedgerReport ledger,
                             VerifyLedger(plan, adj, spec));
  EXPECT_FALSE(ledger.schur_ok);
  EXPECT_LT(ledger.schur_margins[1], 0.0);
  EXPECT_TRUE(ledger.budget_ok);
}

TEST(VerifyLedgerTest, DetectsABrokenRatio) {
  std::mt19937_64 gen(81);
  Instance inst = MakeInstance(2, 2, 60, gen);
  const AdjacencySet adj = EnumerateLabelFlip(inst.data, inst.fit);
  const PrivacySpec spec = Spec(1.0);
  DPGMM_ASSERT_OK_AND_ASSIGN(NoisePlan plan, Plan(inst.fit, adj, spec));
  plan.transition->matrix(0, 1) *= 1.01;
  DPGMM_ASSERT_OK_AND_ASSIGN(LedgerReport ledger,
                             VerifyLedger(plan, adj, spec));
  EXPECT_FALSE(ledger.ratio_ok);
  EXPECT_FALSE(ledger.passed());
}

TEST(WorstQuadraticFormTest, IsotropicRadiusUsesTheSmallestEigenvalue) {
  std::mt19937_64 gen(82);
  AdjacencySet adj;
  adj.class_sizes = {10};
  adj.mean_diffs = {{}};
  adj.isotropic_radius = {0.5};
  const SymMatrix gi = RandomSpd(3, gen);
  DPGMM_ASSERT_OK_AND_ASSIGN(double worst, WorstQuadraticForm(gi, adj, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gi.matrix());
  EXPECT_NEAR(worst, 0.25 / es.eigenvalues()(0), 1e-10 * worst);
}

}  // namespace
}  // namespace dpgmm
