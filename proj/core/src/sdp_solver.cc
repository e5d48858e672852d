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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "Eigen/Cholesky"
#include "absl/strings/str_cat.h"
#include "dpgmm/status.h"

namespace dpgmm {
namespace {

// Constraints whose slack 1 - c d^T X^{-1} d falls below this are treated as
// violated by the final check.
constexpr double kSlackFloor = 1e-12;
// Smallest eigenvalue of a returned X relative to its largest diagonal entry;
// ten times the Cholesky pivot tolerance.
constexpr double kSpectrumFloor = 10.0 * kCholeskyRelTol;
constexpr double kCenteringTol = 1e-10;
constexpr double kBarrierGrowth = 10.0;

// Coordinates of the symmetric space: x_p = X(a, b) for a <= b.
struct SymBasis {
  explicit SymBasis(int n) {
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) pairs.emplace_back(a, b);
    }
  }
  int size() const { return static_cast<int>(pairs.size()); }
  std::vector<std::pair<int, int>> pairs;
};

// tr(M E_p) for symmetric M.
double Coef(const Matrix& m, const std::pair<int, int>& p) {
  return p.first == p.second ? m(p.first, p.first)
                             : 2.0 * m(p.first, p.second);
}

// Adds tr(Z E_p Z E_q) for every p, q. With E_(a,b) = e_a e_b^T + e_b e_a^T
// the single-term product tr(Z e_a e_b^T Z e_c e_e^T) is Z_bc Z_ea.
void AddHessian(const Matrix& z, const SymBasis& basis, Matrix* h) {
  const int np = basis.size();
  for (int p = 0; p < np; ++p) {
    const auto [a, b] = basis.pairs[p];
    for (int q = p; q < np; ++q) {
      const auto [c, e] = basis.pairs[q];
      double v;
      if (a == b && c == e) {
        v = z(a, c) * z(c, a);
      } else if (a == b) {
        v = 2.0 * z(a, c) * z(e, a);
      } else if (c == e) {
        v = 2.0 * z(b, c) * z(c, a);
      } else {
        v = 2.0 * (z(b, c) * z(e, a) + z(b, e) * z(c, a));
      }
      (*h)(p, q) += v;
      if (q != p) (*h)(q, p) += v;
    }
  }
}

Matrix FromCoords(const Vector& x, const SymBasis& basis, int n) {
  Matrix m(n, n);
  for (int p = 0; p < basis.size(); ++p) {
    const auto [a, b] = basis.pairs[p];
    m(a, b) = x(p);
    m(b, a) = x(p);
  }
  return m;
}

// Barrier value t tr(A X) - sum_i [ln det X + ln beta_i(X)], or nullopt when
// X is outside the feasible interior.
std::optional<double> BarrierValue(const Matrix& a, const Matrix& x,
                                   const std::vector<Vector>& ds, double c,
                                   double t) {
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Matrix& l = llt.matrixLLT();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0)) return std::nullopt;
    logdet += 2.0 * std::log(l(i, i));
  }
  double value = t * a.cwiseProduct(x).sum();
  for (const Vector& d : ds) {
    const Vector w = llt.matrixL().solve(d);
    const double beta = 1.0 - c * w.squaredNorm();
    if (!(beta > 0)) return std::nullopt;
    value -= logdet + std::log(beta);
  }
  return value;
}

bool CanonicalLess(const Vector& u, const Vector& v) {
  return std::lexicographical_compare(u.data(), u.data() + u.size(), v.data(),
                                      v.data() + v.size());
}

std::vector<double> ConstraintLoads(const SdpProblem& p,
                                    const LowerTriangularFactor& chol) {
  std::vector<double> loads;
  loads.reserve(p.constraints.size());
  for (const Vector& d : p.constraints) {
    loads.push_back(p.bound_c * chol.InverseQuadraticForm(d));
  }
  return loads;
}

}  // namespace

SdpProblem DeduplicateConstraints(const SdpProblem& p) {
  SdpProblem out{p.objective_weight, {}, p.bound_c};
  for (const Vector& d : p.constraints) {
    Eigen::Index lead = 0;
    while (lead < d.size() && d(lead) == 0.0) ++lead;
    if (lead == d.size()) continue;
    out.constraints.push_back(d(lead) < 0 ? Vector(-d) : d);
  }
  std::sort(out.constraints.begin(), out.constraints.end(), CanonicalLess);
  out.constraints.erase(
      std::unique(out.constraints.begin(), out.constraints.end(),
                  [](const Vector& u, const Vector& v) { return u == v; }),
      out.constraints.end());
  return out;
}

absl::StatusOr<double> MinConstraintSlack(const SdpProblem& p,
                                          const SymMatrix& x) {
  DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor chol, Cholesky(x));
  double slack = 1.0;
  for (double load : ConstraintLoads(p, chol)) {
    slack = std::min(slack, 1.0 - load);
  }
  return slack;
}

absl::StatusOr<SdpSolution> SolveSdp(const SdpProblem& problem, double tol) {
  if (!(problem.bound_c > 0) || !std::isfinite(problem.bound_c)) {
    return MakeError(ErrorCode::kInvalidArgument, "bound c must be positive");
  }
  const SdpProblem p = DeduplicateConstraints(problem);
  if (p.constraints.empty()) {
    return MakeError(ErrorCode::kDegenerateAdjacency,
                     "no nonzero constraint vector");
  }
  DPGMM_RETURN_IF_ERROR(Cholesky(p.objective_weight).status());
  const int n = p.dim();
  const int m = static_cast<int>(p.constraints.size());

  // Whiten: with A = W W^T and Y = W^T X W the objective is tr(Y) and each
  // constraint reads Y >= c u u^T for u = W^T d.
  const Eigen::LLT<Matrix> a_llt(p.objective_weight.matrix());
  const Matrix w = a_llt.matrixL();
  std::vector<Vector> us;
  us.reserve(m);
  double max_norm2 = 0.0;
  for (const Vector& d : p.constraints) {
    us.push_back(w.transpose() * d);
    max_norm2 = std::max(max_norm2, us.back().squaredNorm());
  }
  // Y = scale * Yh; constraints Yh >= ch u u^T with ch max ||u||^2 = 1.
  const double scale = p.bound_c * max_norm2;
  const double ch = p.bound_c / scale;
  const Matrix ah = Matrix::Identity(n, n);

  const SymBasis basis(n);
  const int np = basis.size();
  const double nu = static_cast<double>(m) * n;

  Matrix x = 2.0 * Matrix::Identity(n, n);
  double t = 1.0;
  int steps = 0;
  int outer = 0;
  while (true) {
    ++outer;
    // Centering by damped Newton steps in coordinates where X is I.
    while (true) {
      Eigen::LLT<Matrix> llt(x);
      if (llt.info() != Eigen::Success) {
        return MakeError(ErrorCode::kNumericalFailure,
                         "iterate lost positive definiteness");
      }
      const Matrix l = llt.matrixL();
      const Matrix a_local = l.transpose() * ah * l;
      Vector grad(np);
      for (int q = 0; q < np; ++q) grad(q) = t * Coef(a_local, basis.pairs[q]);
      Matrix hess = Matrix::Zero(np, np);
      for (const Vector& u : us) {
        const Vector v = llt.matrixL().solve(u);
        const double beta = 1.0 - ch * v.squaredNorm();
        const Matrix z =
            Matrix::Identity(n, n) + (ch / beta) * v * v.transpose();
        for (int q = 0; q < np; ++q) grad(q) -= Coef(z, basis.pairs[q]);
        AddHessian(z, basis, &hess);
      }
      Eigen::LLT<Matrix> hllt(hess);
      Vector step;
      if (hllt.info() == Eigen::Success) {
        step = hllt.solve(-grad);
      } else {
        step = hess.ldlt().solve(-grad);
      }
      const double decrement2 = -grad.dot(step);
      if (!std::isfinite(decrement2)) {
        return MakeError(ErrorCode::kNumericalFailure,
                         "non-finite Newton decrement");
      }
      if (decrement2 / 2.0 <= kCenteringTol) break;
      if (++steps > kMaxNewtonSteps) {
        return MakeError(ErrorCode::kNumericalFailure,
                         absl::StrCat("no convergence within ",
                                      kMaxNewtonSteps, " Newton steps"));
      }
      const Matrix dx = l * FromCoords(step, basis, n) * l.transpose();
      const std::optional<double> phi0 =
          BarrierValue(ah, x, us, ch, t);
      double alpha = 1.0;
      bool moved = false;
      for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
        const Matrix trial = x + alpha * dx;
        const std::optional<double> phi =
            BarrierValue(ah, trial, us, ch, t);
        if (!phi.has_value()) continue;
        if (*phi < *phi0 && *phi <= *phi0 - 0.25 * alpha * decrement2) {
          x = 0.5 * (trial + trial.transpose());
          moved = true;
          break;
        }
      }
      // No representable decrease left: the point is centered to rounding.
      if (!moved) break;
    }
    const double objective = ah.cwiseProduct(x).sum();
    if (nu / t <= tol * std::abs(objective)) break;
    t *= kBarrierGrowth;
  }

  // X = W^{-T} Y W^{-1}.
  const auto w_upper = w.transpose().triangularView<Eigen::Upper>();
  const Matrix half = w_upper.solve(x * scale);
  SymMatrix result(Matrix(w_upper.solve(half.transpose())));
  // A rank-deficient optimum (collinear constraints against an
  // ill-conditioned A) drives the barrier iterate toward singularity. Lift
  // the spectrum so the result clears the Cholesky pivot test.
  const double max_diag = result.matrix().diagonal().maxCoeff();
  const double lambda_min = JacobiEigen(result).values(0);
  if (lambda_min < kSpectrumFloor * max_diag) {
    result = SymMatrix(result.matrix() +
                       (kSpectrumFloor * max_diag - lambda_min) *
                           Matrix::Identity(n, n));
  }
  // Rounding in the rescale can leave an active constraint marginally
  // violated; inflate until every slack clears the floor.
  for (int attempt = 0; attempt < 8; ++attempt) {
    DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor chol, Cholesky(result));
    double worst = 0.0;
    for (double load : ConstraintLoads(p, chol)) worst = std::max(worst, load);
    if (worst <= 1.0 - kSlackFloor) break;
    result = result * (worst / (1.0 - kSlackFloor) * (1.0 + 1e-10));
  }
  SdpSolution out;
  out.objective = problem.objective_weight.matrix()
                      .cwiseProduct(result.matrix())
                      .sum();
  out.x = std::move(result);
  out.newton_steps = steps;
  out.outer_iterations = outer;
  out.active_constraints = m;
  return out;
}

SdpProblem PruneConstraints(const SdpProblem& p, const SymMatrix& x_current,
                            int keep) {
  const SdpProblem full = DeduplicateConstraints(p);
  keep = std::max(keep, full.dim());
  if (static_cast<int>(full.constraints.size()) <= keep) return full;
  absl::StatusOr<LowerTriangularFactor> chol = Cholesky(x_current);
  std::vector<double> scores;
  if (chol.ok()) {
    scores = ConstraintLoads(full, *chol);
  } else {
    for (const Vector& d : full.constraints) scores.push_back(d.squaredNorm());
  }
  std::vector<size_t> order(full.constraints.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return scores[i] > scores[j]; });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  SdpProblem out{full.objective_weight, {}, full.bound_c};
  for (size_t i : order) out.constraints.push_back(full.constraints[i]);
  return out;
}

absl::StatusOr<SdpSolution> SolveSdpPruned(
    const SdpProblem& p, double tol, int keep,
    const std::optional<SymMatrix>& x_hint) {
  const SdpProblem full = DeduplicateConstraints(p);
  keep = std::max(keep, full.dim());
  if (static_cast<int>(full.constraints.size()) <= keep) {
    return SolveSdp(full, tol);
  }
  const SymMatrix start =
      x_hint.has_value() ? *x_hint : SymMatrix::Identity(full.dim());
  SdpProblem active = PruneConstraints(full, start, keep);
  while (true) {
    DPGMM_ASSIGN_OR_RETURN(SdpSolution sol, SolveSdp(active, tol));
    DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor chol, Cholesky(sol.x));
    const std::vector<double> loads = ConstraintLoads(full, chol);
    std::vector<size_t> violated;
    for (size_t i = 0; i < loads.size(); ++i) {
      if (loads[i] > 1.0 - kSlackFloor) violated.push_back(i);
    }
    if (violated.empty()) return sol;
    // Re-add the worst offenders only, at most d per round.
    std::stable_sort(violated.begin(), violated.end(),
                     [&](size_t i, size_t j) { return loads[i] > loads[j]; });
    if (static_cast<int>(violated.size()) > full.dim()) {
      violated.resize(full.dim());
    }
    for (size_t i : violated) active.constraints.push_back(full.constraints[i]);
    active = DeduplicateConstraints(active);
  }
}

}  // namespace dpgmm
