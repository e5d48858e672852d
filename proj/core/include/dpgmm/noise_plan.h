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

// Value types shared by the planner, the samplers and the evaluators: the
// privacy request, the optimized mechanism description and a released model.

#ifndef DPGMM_NOISE_PLAN_H_
#define DPGMM_NOISE_PLAN_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgmm/adjacency.h"
#include "dpgmm/linalg.h"
#include "dpgmm/model.h"

namespace dpgmm {

struct PrivacySpec {
  double epsilon = 1.0;
  double delta = 1e-5;
  double lambda = 1e-3;
  AdjacencyMode mode;

  // Requires epsilon > 0 and delta, lambda in (0, 1).
  static absl::StatusOr<PrivacySpec> Create(double epsilon, double delta,
                                            double lambda, AdjacencyMode mode);
};

// The discrete weight mapper. Row i of `matrix` is indexed by output
// support[i]; column j by input support[j]. Rows sum to one.
struct TransitionPlan {
  std::vector<WeightCounts> support;
  int j_star = 0;
  Matrix matrix;
  double lambda = 0.0;
  // ln |S| for the lattice of the fitted dataset.
  double log_s_cardinality = 0.0;

  // m = |S'(D)|.
  int m() const { return static_cast<int>(support.size()) - 1; }
  // Column j_star renormalized to a probability vector: the output law of
  // the restricted branch.
  Vector SamplingPmf() const;
};

struct ClassNoise {
  double eps_k = 0.0;
  double gamma_k = 0.0;
  SymMatrix gamma_inv;
};

struct NoisePlan {
  double epsilon = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  AdjacencyMode mode;
  bool uniform_bound = false;
  double eps0 = 0.0;
  std::vector<ClassNoise> classes;
  // Absent when the weights are released unperturbed (feature changes).
  std::optional<TransitionPlan> transition;
  std::vector<double> objective_trace;
  int iterations = 0;

  int k() const { return static_cast<int>(classes.size()); }
};

struct ReleaseMeta {
  double epsilon = 0.0;
  double delta = 0.0;
  double epsilon0 = 0.0;
  double lambda = 0.0;
  uint64_t seed = 0;
  AdjacencyVariant adjacency = AdjacencyVariant::kLabelFlip;
};

struct ReleasedGmm {
  GmmParams params;
  ReleaseMeta meta;
};

}  // namespace dpgmm

#endif  // DPGMM_NOISE_PLAN_H_
