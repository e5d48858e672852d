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

#include "dpgmm/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpgmm/status.h"

namespace dpgmm {
namespace {

int SampleIndex(const Vector& pmf, double u) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pmf.size(); ++i) {
    acc += pmf(i);
    if (u < acc) return static_cast<int>(i);
  }
  // u landed in the rounding gap above the final partial sum.
  for (Eigen::Index i = pmf.size() - 1; i >= 0; --i) {
    if (pmf(i) > 0) return static_cast<int>(i);
  }
  return 0;
}

}  // namespace

absl::StatusOr<Vector> SampleGaussianMean(const Vector& mu,
                                          const SymMatrix& gamma_inv,
                                          RandomStream& rng) {
  DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor chol, Cholesky(gamma_inv));
  Vector z(mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.NextNormal();
  return Vector(mu + chol.Apply(z));
}

SymMatrix SampleWishart(double gamma, int d, RandomStream& rng) {
  Matrix a = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    // 1-based row i + 1 gets (d + 1) - (i + 1) + 1 = d + 1 - i dof.
    a(i, i) = std::sqrt(rng.NextChiSquare(d + 1 - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.NextNormal();
  }
  return SymMatrix(a * a.transpose() / gamma);
}

WeightCounts SampleUniformLattice(int64_t n, int k, RandomStream& rng) {
  // Floyd's subset sampling of k - 1 cut points from {1, ..., n - 1}.
  const int64_t pool = n - 1;
  std::vector<int64_t> cuts;
  cuts.reserve(k - 1);
  for (int64_t j = pool - (k - 1) + 1; j <= pool; ++j) {
    const int64_t t = 1 + static_cast<int64_t>(rng.NextBelow(j));
    if (std::find(cuts.begin(), cuts.end(), t) == cuts.end()) {
      cuts.push_back(t);
    } else {
      cuts.push_back(j);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  WeightCounts out;
  out.counts.reserve(k);
  int64_t prev = 0;
  for (int64_t c : cuts) {
    out.counts.push_back(c - prev);
    prev = c;
  }
  out.counts.push_back(n - prev);
  return out;
}

WeightDraw SampleWeightDraw(const TransitionPlan& plan, RandomStream& rng) {
  const WeightCounts& center = plan.support[plan.j_star];
  WeightDraw draw;
  if (plan.lambda > 0 && rng.NextUniform() < plan.lambda) {
    draw.from_uniform_branch = true;
    draw.counts = SampleUniformLattice(center.total(), center.k(), rng);
    for (size_t i = 0; i < plan.support.size(); ++i) {
      if (plan.support[i] == draw.counts) {
        draw.support_index = static_cast<int>(i);
        break;
      }
    }
    return draw;
  }
  draw.support_index = SampleIndex(plan.SamplingPmf(), rng.NextUniform());
  draw.counts = plan.support[draw.support_index];
  return draw;
}

WeightCounts SampleWeights(const TransitionPlan& plan, RandomStream& rng) {
  return SampleWeightDraw(plan, rng).counts;
}

absl::StatusOr<ReleasedGmm> Release(const GmmParams& fit,
                                    const NoisePlan& plan, uint64_t seed) {
  if (plan.k() != fit.k()) {
    return MakeError(ErrorCode::kSchemaMismatch,
                     "plan and model disagree on the number of classes");
  }
  const RandomStream root(seed);
  ReleasedGmm out;
  out.params = fit;
  for (int c = 0; c < fit.k(); ++c) {
    RandomStream stream = root.Derive(static_cast<uint64_t>(c) + 1);
    const ClassNoise& noise = plan.classes[c];
    DPGMM_ASSIGN_OR_RETURN(out.params.means[c],
                           SampleGaussianMean(fit.means[c], noise.gamma_inv,
                                              stream));
    out.params.covs[c] =
        fit.covs[c] + SampleWishart(noise.gamma_k, fit.d(), stream);
  }
  if (plan.transition.has_value()) {
    RandomStream stream = root.Derive(0);
    out.params.weights = SampleWeightDraw(*plan.transition, stream).counts;
  }
  out.meta = ReleaseMeta{plan.epsilon, plan.delta,  plan.eps0,
                         plan.lambda,  seed,        plan.mode.variant};
  return out;
}

absl::StatusOr<SyntheticSample> SampleFromGmm(const GmmParams& model,
                                              int64_t n, uint64_t seed) {
  if (n < 0) {
    return MakeError(ErrorCode::kInvalidArgument, "sample size must be >= 0");
  }
  const int k = model.k();
  const int d = model.d();
  std::vector<LowerTriangularFactor> factors;
  factors.reserve(k);
  for (int c = 0; c < k; ++c) {
    DPGMM_ASSIGN_OR_RETURN(LowerTriangularFactor chol, Cholesky(model.covs[c]));
    factors.push_back(std::move(chol));
  }
  Vector pmf(k);
  for (int c = 0; c < k; ++c) pmf(c) = model.weights.weight(c);

  RandomStream rng(seed);
  SyntheticSample out;
  out.points.resize(n, d);
  out.labels.resize(n);
  Vector z(d);
  for (int64_t i = 0; i < n; ++i) {
    const int c = SampleIndex(pmf, rng.NextUniform());
    for (int j = 0; j < d; ++j) z(j) = rng.NextNormal();
    out.points.row(i) = (model.means[c] + factors[c].Apply(z)).transpose();
    out.labels[i] = c + 1;
  }
  return out;
}

}  // namespace dpgmm
