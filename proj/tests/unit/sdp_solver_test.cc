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


#include "dpgmm/sdp_solver.h"

#include <cmath>
#include <random>
#include <vector>

#include "dpgmm/status.h"
#include "gtest/gtest.h"
#include "sdp_dual_oracle.h"
#include "test_util.h"

namespace dpgmm {
namespace {

using ::dpgmm::testing::RandomSpd;
using ::dpgmm::testing::RandomVector;

SdpProblem RandomProblem(int d, int m, std::mt19937_64& gen) {
  SdpProblem p;
  p.objective_weight = RandomSpd(d, gen);
  for (int i = 0; i < m; ++i) p.constraints.push_back(RandomVector(d, gen));
  p.bound_c = std::uniform_real_distribution<double>(0.1, 10.0)(gen);
  return p;
}

TEST(SdpSolverTest, SingleConstraintAnalyticOptimum) {
  std::mt19937_64 gen(60);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 4;
    SdpProblem p = RandomProblem(d, 1, gen);
    const Vector& v = p.constraints[0];
    const double expected = p.bound_c * v.dot(p.objective_weight.matrix() * v);
    DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution sol, SolveSdp(p));
    EXPECT_NEAR(sol.objective, expected, 1e-6 * expected);
    DPGMM_ASSERT_OK_AND_ASSIGN(double slack, MinConstraintSlack(p, sol.x));
    EXPECT_GE(slack, 0.0);
  }
}

TEST(SdpSolverTest, AgreesWithDualAscentOracle) {
  std::mt19937_64 gen(61);
  for (int trial = 0; trial < 8; ++trial) {
    const int d = 2 + trial % 2;
    const int m = d + static_cast<int>(gen() % 10);
    const SdpProblem p = RandomProblem(d, m, gen);
    const oracle::SdpBracket bracket = oracle::SolveSdpByDualAscent(
        p.objective_weight.matrix(), p.constraints, p.bound_c, 100000);
    ASSERT_LT(bracket.relative_gap(), 1e-5);
    DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution sol, SolveSdp(p));
    EXPECT_NEAR(sol.objective, bracket.upper, 1e-5 * bracket.upper);
    EXPECT_GE(sol.objective, bracket.lower * (1 - 1e-12));
    DPGMM_ASSERT_OK_AND_ASSIGN(double slack, MinConstraintSlack(p, sol.x));
    EXPECT_GE(slack, 0.0);
  }
}

TEST(SdpSolverTest, ObjectiveScalesWithProblem) {
  std::mt19937_64 gen(62);
  SdpProblem p = RandomProblem(3, 6, gen);
  DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution base, SolveSdp(p));
  SdpProblem scaled = p;
  scaled.objective_weight = p.objective_weight * 7.0;
  scaled.bound_c = p.bound_c * 3.0;
  DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution sol, SolveSdp(scaled));
  EXPECT_NEAR(sol.objective, 21.0 * base.objective, 1e-6 * sol.objective);
}

TEST(DeduplicateTest, MergesSignFlipsAndDropsZeros) {
  Vector a(2);
  a << 1.0, -2.0;
  SdpProblem p;
  p.objective_weight = SymMatrix::Identity(2);
  p.constraints = {a, -a, Vector::Zero(2), a, Vector::Unit(2, 1)};
  const SdpProblem q = DeduplicateConstraints(p);
  ASSERT_EQ(q.constraints.size(), 2u);
  for (const Vector& v : q.constraints) {
    const int first = v(0) != 0.0 ? 0 : 1;
    EXPECT_GT(v(first), 0.0);
  }
  EXPECT_EQ(DeduplicateConstraints(q).constraints, q.constraints);
}

TEST(SdpSolverTest, DuplicatesDoNotChangeTheOptimum) {
  std::mt19937_64 gen(63);
  SdpProblem p = RandomProblem(2, 5, gen);
  DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution base, SolveSdp(p));
  SdpProblem doubled = p;
  for (const Vector& v : p.constraints) doubled.constraints.push_back(-v);
  DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution sol, SolveSdp(doubled));
  EXPECT_NEAR(sol.objective, base.objective, 1e-7 * base.objective);
}

TEST(SdpSolverTest, Errors) {
  SdpProblem p;
  p.objective_weight = SymMatrix::Identity(2);
  p.constraints = {Vector::Zero(2)};
  EXPECT_EQ(ErrorCodeOf(SolveSdp(p)), ErrorCode::kDegenerateAdjacency);
  p.constraints = {Vector::Ones(2)};
  p.objective_weight = SymMatrix::Identity(2) * -1.0;
  EXPECT_EQ(ErrorCodeOf(SolveSdp(p)), ErrorCode::kNotPositiveDefinite);
}

TEST(SdpSolverTest, RankDeficientOptimumStillPassesThePdCheck) {
  // Collinear constraints against a weight that punishes the orthogonal
  // plane: the optimum c d d^T is singular.
  SdpProblem p;
  Matrix a = Matrix::Identity(3, 3) * 1e8;
  a(0, 0) = 1.0;
  p.objective_weight = SymMatrix(a);
  p.constraints = {Vector::Unit(3, 0), Vector::Unit(3, 0) * 2.0,
                   Vector::Unit(3, 0) * -0.5};
  p.bound_c = 3.0;
  DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution sol, SolveSdp(p));
  EXPECT_TRUE(Cholesky(sol.x).ok());
  DPGMM_ASSERT_OK_AND_ASSIGN(double slack, MinConstraintSlack(p, sol.x));
  EXPECT_GE(slack, 0.0);
  EXPECT_GE(sol.objective, 12.0);
  EXPECT_LE(sol.objective, 12.0 * (1.0 + 1e-2));
}

TEST(PrunedSolverTest, MatchesFullSolveAndStaysFeasible) {
  std::mt19937_64 gen(64);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 3;
    const SdpProblem p = RandomProblem(d, 60, gen);
    DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution full, SolveSdp(p));
    DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution pruned,
                               SolveSdpPruned(p, kDefaultSdpTolerance, 2 * d));
    EXPECT_NEAR(pruned.objective, full.objective, 1e-6 * full.objective);
    EXPECT_LE(pruned.active_constraints, 60);
    DPGMM_ASSERT_OK_AND_ASSIGN(double slack, MinConstraintSlack(p, pruned.x));
    EXPECT_GE(slack, 0.0);
  }
}

TEST(PrunedSolverTest, HandlesThousandsOfConstraints) {
  std::mt19937_64 gen(65);
  for (int d : {2, 4, 6}) {
    const SdpProblem p = RandomProblem(d, 3000, gen);
    DPGMM_ASSERT_OK_AND_ASSIGN(SdpSolution pruned,
                               SolveSdpPruned(p, kDefaultSdpTolerance, 2 * d));
    DPGMM_ASSERT_OK_AND_ASSIGN(double slack, MinConstraintSlack(p, pruned.x));
    EXPECT_GE(slack, 0.0);
    EXPECT_LT(pruned.active_constraints, 3000);
  }
}

TEST(PruneTest, KeepsTheTightestConstraints) {
  SdpProblem p;
  p.objective_weight = SymMatrix::Identity(2);
  p.bound_c = 1.0;
  for (double s : {0.1, 3.0, 0.5, 2.0}) {
    p.constraints.push_back(Vector::Unit(2, 0) * s);
  }
  p.constraints.push_back(Vector::Unit(2, 1) * 0.2);
  const SdpProblem kept = PruneConstraints(p, SymMatrix::Identity(2), 2);
  ASSERT_EQ(kept.constraints.size(), 2u);
  double total = 0.0;
  for (const Vector& v : kept.constraints) total += v.norm();
  EXPECT_DOUBLE_EQ(total, 5.0);
}

}  // namespace
}  // namespace dpgmm
