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

// Reference solver for
//   min tr(A X)  s.t.  c d_i^T X^{-1} d_i <= 1,  X > 0
// by projected supergradient ascent on the Lagrange dual
//   g(lambda) = 2 tr((A^{1/2} M A^{1/2})^{1/2}) - sum_i lambda_i,
//   M = c sum_i lambda_i d_i d_i^T,   lambda >= 0.
// Every iterate also yields a primal point, X(lambda) scaled up until it is
// feasible, so the oracle brackets the optimum from both sides. It shares no
// code with the library solver.

#ifndef DPGMM_TESTS_ORACLES_SDP_DUAL_ORACLE_H_
#define DPGMM_TESTS_ORACLES_SDP_DUAL_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "Eigen/Dense"

namespace dpgmm::oracle {

struct SdpBracket {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double midpoint() const { return 0.5 * (lower + upper); }
  double relative_gap() const { return (upper - lower) / std::abs(upper); }
};

namespace internal {

inline void SymEigen(const Eigen::MatrixXd& m, Eigen::VectorXd& values,
                     Eigen::MatrixXd& vectors) {
  const int n = static_cast<int>(m.rows());
  if (n == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
    es.computeDirect(Eigen::Matrix2d(m));
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  } else if (n == 3) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.computeDirect(Eigen::Matrix3d(m));
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }
}

}  // namespace internal

inline SdpBracket SolveSdpByDualAscent(const Eigen::MatrixXd& a,
                                       const std::vector<Eigen::VectorXd>& ds,
                                       double c, long iterations) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(ds.size());

  // Rescale so that tr(A) = n and c max ||d||^2 = 1.
  double max_norm2 = 0.0;
  for (const auto& d : ds) max_norm2 = std::max(max_norm2, d.squaredNorm());
  const double scale_a = a.trace() / n;
  const double scale_x = c * max_norm2;
  const Eigen::MatrixXd an = a / scale_a;
  const double cn = c / scale_x;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(an);
  const Eigen::MatrixXd a_half = ea.eigenvectors() *
                                 ea.eigenvalues().cwiseSqrt().asDiagonal() *
                                 ea.eigenvectors().transpose();
  std::vector<Eigen::VectorXd> u(m);
  for (int i = 0; i < m; ++i) u[i] = a_half * ds[i];

  Eigen::VectorXd lambda = Eigen::VectorXd::Constant(m, 1.0 / m);
  Eigen::VectorXd grad(m);
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  SdpBracket best;
  for (long t = 0; t < iterations; ++t) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < m; ++i) {
      p.noalias() += (cn * lambda(i)) * u[i] * u[i].transpose();
    }
    internal::SymEigen(p, values, vectors);
    const double floor = 1e-14 * std::max(values.maxCoeff(), 1e-300);
    double trace_sqrt = 0.0;
    Eigen::VectorXd inv_sqrt(n);
    for (int j = 0; j < n; ++j) {
      const double v = std::max(values(j), 0.0);
      trace_sqrt += std::sqrt(v);
      inv_sqrt(j) = 1.0 / std::sqrt(std::max(v, floor));
    }
    const double dual = 2.0 * trace_sqrt - lambda.sum();
    best.lower = std::max(best.lower, dual);

    // Primal point X = A^{-1/2} P^{1/2} A^{-1/2}, with
    // X^{-1} = A^{1/2} P^{-1/2} A^{1/2}, so d^T X^{-1} d = u^T P^{-1/2} u.
    double worst_load = 0.0;
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd w = vectors.transpose() * u[i];
      const double q = w.cwiseAbs2().dot(inv_sqrt);
      grad(i) = cn * q - 1.0;
      worst_load = std::max(worst_load, cn * q);
    }
    if (values.minCoeff() > floor) {
      // tr(A X) = tr(P^{1/2}).
      best.upper = std::min(best.upper, trace_sqrt * std::max(1.0, worst_load));
    }

    const double step = 0.5 / std::sqrt(static_cast<double>(t) + 1.0);
    const double gnorm = std::max(grad.norm(), 1.0);
    lambda = (lambda + (step / gnorm) * grad).cwiseMax(0.0);
  }
  best.lower *= scale_a * scale_x;
  best.upper *= scale_a * scale_x;
  return best;
}

}  // namespace dpgmm::oracle

#endif  // DPGMM_TESTS_ORACLES_SDP_DUAL_ORACLE_H_
