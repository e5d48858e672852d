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

// Enumeration of neighboring datasets. Every DP bound used by the planner and
// the audit is derived from an AdjacencySet: the per-class mean shifts an
// adjacent dataset can cause, and the weight vectors it can produce.

#ifndef DPGMM_ADJACENCY_H_
#define DPGMM_ADJACENCY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "dpgmm/linalg.h"
#include "dpgmm/model.h"

namespace dpgmm {

enum class AdjacencyVariant {
  kLabelFlip,      // one record changes its label
  kRemoveOne,      // one record is removed
  kAddOne,         // one norm-bounded record is added
  kFeatureChange,  // one record's features change within the norm bound
};

// "label", "remove", "add", "feature".
absl::string_view AdjacencyName(AdjacencyVariant variant);
absl::StatusOr<AdjacencyVariant> ParseAdjacency(absl::string_view name);

struct AdjacencyMode {
  AdjacencyVariant variant = AdjacencyVariant::kLabelFlip;
  // Feature norm bound B; required for kAddOne and kFeatureChange.
  std::optional<double> clip_bound;

  static absl::StatusOr<AdjacencyMode> Create(AdjacencyVariant variant,
                                              std::optional<double> clip_bound);
};

struct AdjacencySet {
  AdjacencyMode mode;
  // mean_diffs[k] lists mu_k(D) - mu_k(D') over every admissible D' that
  // moves class k, in canonical (record, target class) order.
  std::vector<std::vector<Vector>> mean_diffs;
  // The neighbor weight set S'(D).
  std::vector<WeightCounts> weight_neighbors;
  std::vector<int64_t> class_sizes;
  // Per-class norm bound r_k on mean shifts that are not enumerated
  // explicitly; enforced as Gamma_k^{-1} >= c r_k^2 I. Zero when unused.
  std::vector<double> isotropic_radius;
  int64_t admissible_flips = 0;
  // Label flips dropped because they would empty their source class.
  int64_t excluded_flips = 0;
  bool uniform_bound = false;

  int k() const { return static_cast<int>(class_sizes.size()); }
  size_t constraint_count() const;
};

AdjacencySet EnumerateLabelFlip(const LabeledDataset& data,
                                const GmmParams& fit);

// RemoveOne, AddOne and FeatureChange. Fails with ClipViolation when a
// bounded mode sees a record with norm above B.
absl::StatusOr<AdjacencySet> EnumerateRecordLevel(const LabeledDataset& data,
                                                  const GmmParams& fit,
                                                  const AdjacencyMode& mode);

// Dispatches on mode.variant.
absl::StatusOr<AdjacencySet> EnumerateAdjacency(const LabeledDataset& data,
                                                const GmmParams& fit,
                                                const AdjacencyMode& mode);

// Replaces the enumerated mean differences by a per-class norm bound derived
// from ||x_n|| <= b: 2b/N_k for feature changes, 2b/(N_k - 1) when a removal
// is admissible, 2b/(N_k + 1) otherwise.
absl::StatusOr<AdjacencySet> ApplyUniformBound(const LabeledDataset& data,
                                               AdjacencySet adj, double b);

// Scales every record with norm above b onto the radius-b sphere.
LabeledDataset ClipDataset(const LabeledDataset& data, double b);

}  // namespace dpgmm

#endif  // DPGMM_ADJACENCY_H_
