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

#include "dpgmm/linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "absl/strings/str_cat.h"
#include "dpgmm/status.h"

namespace dpgmm {

SymMatrix::SymMatrix(const Matrix& m) : entries_(m.rows(), m.cols()) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    entries_(i, i) = m(i, i);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      entries_(i, j) = v;
      entries_(j, i) = v;
    }
  }
}

SymMatrix SymMatrix::Identity(int dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::Zero(int dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::Diagonal(const Vector& diag) {
  return SymMatrix(Matrix(diag.asDiagonal()));
}

SymMatrix SymMatrix::Outer(const Vector& v, double c) {
  return SymMatrix(Matrix(c * v * v.transpose()));
}

double SymMatrix::max_diagonal() const {
  if (dim() == 0) return 0.0;
  return entries_.diagonal().cwiseAbs().maxCoeff();
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  return SymMatrix(Matrix(entries_ + other.entries_));
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
  return SymMatrix(Matrix(entries_ - other.entries_));
}

SymMatrix SymMatrix::operator*(double s) const {
  return SymMatrix(Matrix(entries_ * s));
}

Vector LowerTriangularFactor::Solve(const Vector& b) const {
  const Eigen::Index n = lower.rows();
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = b(i);
    for (Eigen::Index k = 0; k < i; ++k) s -= lower(i, k) * y(k);
    y(i) = s / lower(i, i);
  }
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = y(i);
    for (Eigen::Index k = i + 1; k < n; ++k) s -= lower(k, i) * x(k);
    x(i) = s / lower(i, i);
  }
  return x;
}

double LowerTriangularFactor::InverseQuadraticForm(const Vector& b) const {
  const Eigen::Index n = lower.rows();
  Vector y(n);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = b(i);
    for (Eigen::Index k = 0; k < i; ++k) s -= lower(i, k) * y(k);
    y(i) = s / lower(i, i);
    acc += y(i) * y(i);
  }
  return acc;
}

Vector LowerTriangularFactor::Apply(const Vector& z) const {
  const Eigen::Index n = lower.rows();
  Vector out = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k <= i; ++k) s += lower(i, k) * z(k);
    out(i) = s;
  }
  return out;
}

absl::StatusOr<LowerTriangularFactor> Cholesky(const SymMatrix& m) {
  const int n = m.dim();
  const double tol = kCholeskyRelTol * m.max_diagonal();
  Matrix l = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (int k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > tol)) {
      return MakeError(ErrorCode::kNotPositiveDefinite,
                       absl::StrCat("pivot ", j, " is ", pivot,
                                    " (tolerance ", tol, ")"));
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return LowerTriangularFactor{std::move(l)};
}

bool IsPositiveDefinite(const SymMatrix& m) { return Cholesky(m).ok(); }

absl::StatusOr<SymMatrix> InverseSpd(const SymMatrix& m) {
  DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor factor, Cholesky(m));
  const int n = m.dim();
  Matrix inv(n, n);
  for (int j = 0; j < n; ++j) {
    inv.col(j) = factor.Solve(Vector::Unit(n, j));
  }
  return SymMatrix(inv);
}

absl::StatusOr<double> LogDetSpd(const SymMatrix& m) {
  DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor factor, Cholesky(m));
  double acc = 0.0;
  for (int i = 0; i < m.dim(); ++i) acc += std::log(factor.lower(i, i));
  return 2.0 * acc;
}

double Digamma(double x) {
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series with Bernoulli coefficients up to B_14.
  const double tail =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 -
                                                      inv2 / 12.0))))));
  return shift + std::log(x) - 0.5 * inv - tail;
}

absl::StatusOr<double> MultivariateDigamma(double a, int d) {
  if (d < 1 || !(a > 0.5 * (d - 1))) {
    return MakeError(ErrorCode::kDomainError,
                     absl::StrCat("multivariate digamma needs a > (d-1)/2, got a=",
                                  a, " d=", d));
  }
  double acc = 0.0;
  for (int j = 1; j <= d; ++j) acc += Digamma(a + 0.5 * (1 - j));
  return acc;
}

SymmetricEigen JacobiEigen(const SymMatrix& m, int max_sweeps) {
  const int n = m.dim();
  Matrix a = m.matrix();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off <= 1e-300) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (int i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

double MaxAbsDiff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace dpgmm
