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

// Dense symmetric kernels for small dimensions. Every routine is a pure,
// deterministic function of its inputs: the Cholesky factorization never
// pivots, so results are bit-reproducible across runs.

#ifndef DPGMM_LINALG_H_
#define DPGMM_LINALG_H_

#include <cstddef>

#include "Eigen/Core"
#include "absl/status/statusor.h"

namespace dpgmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A real symmetric matrix. Construction symmetrizes its input, so
// (i, j) and (j, i) always hold the same bits.
class SymMatrix {
 public:
  SymMatrix() = default;
  // Averages m with its transpose; m must be square.
  explicit SymMatrix(const Matrix& m);

  static SymMatrix Identity(int dim);
  static SymMatrix Zero(int dim);
  static SymMatrix Diagonal(const Vector& diag);
  // c * v v^T
  static SymMatrix Outer(const Vector& v, double c = 1.0);

  int dim() const { return static_cast<int>(entries_.rows()); }
  double operator()(int i, int j) const { return entries_(i, j); }
  const Matrix& matrix() const { return entries_; }
  double trace() const { return entries_.trace(); }
  double max_diagonal() const;

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator-(const SymMatrix& other) const;
  SymMatrix operator*(double s) const;

  bool operator==(const SymMatrix& other) const {
    return entries_ == other.entries_;
  }

 private:
  Matrix entries_;
};

struct LowerTriangularFactor {
  Matrix lower;

  // Solves (L L^T) x = b.
  Vector Solve(const Vector& b) const;
  // b^T (L L^T)^{-1} b, computed with one forward substitution.
  double InverseQuadraticForm(const Vector& b) const;
  // L z
  Vector Apply(const Vector& z) const;
};

// Relative pivot tolerance: a pivot must exceed kCholeskyRelTol * max|diag|.
inline constexpr double kCholeskyRelTol = 1e-12;

// Unpivoted Cholesky. Fails with NotPositiveDefinite when a pivot is at or
// below the relative tolerance.
absl::StatusOr<LowerTriangularFactor> Cholesky(const SymMatrix& m);

bool IsPositiveDefinite(const SymMatrix& m);

absl::StatusOr<SymMatrix> InverseSpd(const SymMatrix& m);

// ln|m| = 2 * sum(ln L_ii).
absl::StatusOr<double> LogDetSpd(const SymMatrix& m);

// Scalar digamma, absolute error below 1e-12 for x > 0.
double Digamma(double x);

// psi_d(a) = sum_{j=1..d} psi(a + (1 - j) / 2); requires a > (d - 1) / 2.
absl::StatusOr<double> MultivariateDigamma(double a, int d);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column i pairs with values(i)
};

// Cyclic Jacobi eigen-decomposition. Used for extreme-eigenvalue audits and
// as an independent oracle; production factorizations use Cholesky.
SymmetricEigen JacobiEigen(const SymMatrix& m, int max_sweeps = 100);

double MaxAbsDiff(const Matrix& a, const Matrix& b);

}  // namespace dpgmm

#endif  // DPGMM_LINALG_H_
