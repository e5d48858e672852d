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

// Randomized release primitives: Gaussian mean noise, Wishart covariance
// noise and the smoothed discrete weight mapper.

#ifndef DPGMM_MECHANISMS_H_
#define DPGMM_MECHANISMS_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgmm/linalg.h"
#include "dpgmm/model.h"
#include "dpgmm/noise_plan.h"
#include "dpgmm/random.h"

namespace dpgmm {

// mu + chol(gamma_inv) z with z standard normal.
absl::StatusOr<Vector> SampleGaussianMean(const Vector& mu,
                                          const SymMatrix& gamma_inv,
                                          RandomStream& rng);

// W ~ W_d(I / gamma, d + 1) by the Bartlett construction.
SymMatrix SampleWishart(double gamma, int d, RandomStream& rng);

// Uniform element of the lattice {counts >= 1, sum = n} via a uniform
// (k - 1)-subset of {1, ..., n - 1} used as cut points.
WeightCounts SampleUniformLattice(int64_t n, int k, RandomStream& rng);

struct WeightDraw {
  WeightCounts counts;
  // Index into plan.support, or -1 when a lattice draw left the support.
  int support_index = -1;
  bool from_uniform_branch = false;
};

// One draw of the smoothed mapper: with probability lambda a uniform lattice
// element, otherwise an element of the support drawn from SamplingPmf().
WeightDraw SampleWeightDraw(const TransitionPlan& plan, RandomStream& rng);

// The lattice size n and class count k are those of support[j_star].
WeightCounts SampleWeights(const TransitionPlan& plan, RandomStream& rng);

// Adds mean and covariance noise to every class and draws the released
// weights. Class k uses the sub-stream Derive(k + 1), the weights use
// Derive(0), so the output depends only on (fit, plan, seed).
absl::StatusOr<ReleasedGmm> Release(const GmmParams& fit,
                                    const NoisePlan& plan, uint64_t seed);

struct SyntheticSample {
  Matrix points;            // n x d
  std::vector<int> labels;  // 1-based
};

// Ancestral sampling: a class with probability proportional to its weight
// count, then a Gaussian draw from that class.
absl::StatusOr<SyntheticSample> SampleFromGmm(const GmmParams& model,
                                              int64_t n, uint64_t seed);

}  // namespace dpgmm

#endif  // DPGMM_MECHANISMS_H_
