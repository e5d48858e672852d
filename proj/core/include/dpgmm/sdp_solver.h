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

// Interior-point solver for
//
//   minimize tr(A X)  subject to  X >= c d_i d_i^T  for every i,
//
// with A positive definite. The PSD constraints are handled through the
// rank-one identity ln det(X - c d d^T) = ln det X + ln(1 - c d^T X^{-1} d).

#ifndef DPGMM_SDP_SOLVER_H_
#define DPGMM_SDP_SOLVER_H_

#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgmm/linalg.h"

namespace dpgmm {

struct SdpProblem {
  SymMatrix objective_weight;
  std::vector<Vector> constraints;
  double bound_c = 1.0;

  int dim() const { return objective_weight.dim(); }
};

struct SdpSolution {
  SymMatrix x;
  double objective = 0.0;
  int newton_steps = 0;
  int outer_iterations = 0;
  // Constraints in the final solve (after deduplication and pruning).
  int active_constraints = 0;
};

inline constexpr double kDefaultSdpTolerance = 1e-8;
inline constexpr int kMaxNewtonSteps = 200;

// Drops zero vectors and duplicates (d and -d give the same constraint),
// and sorts the rest into a canonical order.
SdpProblem DeduplicateConstraints(const SdpProblem& p);

// Log-barrier Newton method in whitened coordinates Y = W^T X W, A = W W^T,
// where the objective is tr(Y) and the constraint vectors are W^T d_i.
// After rescaling so that c max ||W^T d_i||^2 = 1 it starts from Y = 2I with
// t = 1, and t is multiplied by 10 until (#constraints * dim) / t <= tol *
// objective. The returned X is positive definite with its smallest
// eigenvalue at least 1e-11 of its largest diagonal entry, and satisfies
// c d_i^T X^{-1} d_i < 1 for every constraint.
// Errors: DegenerateAdjacency when no nonzero constraint remains,
// NotPositiveDefinite for a bad A, NumericalFailure past kMaxNewtonSteps.
absl::StatusOr<SdpSolution> SolveSdp(const SdpProblem& p,
                                     double tol = kDefaultSdpTolerance);

// Keeps the `keep` constraints (at least dim) with the largest
// c d_i^T x_current^{-1} d_i.
SdpProblem PruneConstraints(const SdpProblem& p, const SymMatrix& x_current,
                            int keep);

// Solves on a pruned constraint set, then re-adds the (at most dim) most
// violated constraints and solves again until all of them hold.
absl::StatusOr<SdpSolution> SolveSdpPruned(
    const SdpProblem& p, double tol, int keep,
    const std::optional<SymMatrix>& x_hint = std::nullopt);

// min_i (1 - c d_i^T X^{-1} d_i); nonnegative iff X is feasible.
absl::StatusOr<double> MinConstraintSlack(const SdpProblem& p,
                                          const SymMatrix& x);

}  // namespace dpgmm

#endif  // DPGMM_SDP_SOLVER_H_
