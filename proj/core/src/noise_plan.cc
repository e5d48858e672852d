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

#include "dpgmm/noise_plan.h"

#include <cmath>

#include "dpgmm/status.h"

namespace dpgmm {

absl::StatusOr<PrivacySpec> PrivacySpec::Create(double epsilon, double delta,
                                                double lambda,
                                                AdjacencyMode mode) {
  if (!(std::isfinite(epsilon) && epsilon > 0)) {
    return MakeError(ErrorCode::kInvalidArgument, "epsilon must be > 0");
  }
  if (!(delta > 0 && delta < 1)) {
    return MakeError(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  }
  if (!(lambda > 0 && lambda < 1)) {
    return MakeError(ErrorCode::kInvalidArgument, "lambda must lie in (0, 1)");
  }
  return PrivacySpec{epsilon, delta, lambda, mode};
}

Vector TransitionPlan::SamplingPmf() const {
  Vector column = matrix.col(j_star);
  return column / column.sum();
}

}  // namespace dpgmm
