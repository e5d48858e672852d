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

#include "dpgmm/adjacency.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "dpgmm/status.h"

namespace dpgmm {
namespace {

absl::Status CheckClip(const LabeledDataset& data, double b) {
  for (int i = 0; i < data.n(); ++i) {
    const double norm = data.points().row(i).norm();
    if (norm > b) {
      return MakeError(ErrorCode::kClipViolation,
                       absl::StrCat("record ", i + 1, " has norm ", norm,
                                    " > B = ", b));
    }
  }
  return absl::OkStatus();
}

AdjacencySet EmptySet(const GmmParams& fit, const AdjacencyMode& mode) {
  AdjacencySet adj;
  adj.mode = mode;
  adj.class_sizes = fit.weights.counts;
  adj.mean_diffs.assign(fit.k(), {});
  adj.isotropic_radius.assign(fit.k(), 0.0);
  return adj;
}

// Removal of record x from class k: mu_k - (N_k mu_k - x) / (N_k - 1).
Vector RemovalDiff(const Vector& x, const Vector& mu, int64_t nk) {
  return (x - mu) / static_cast<double>(nk - 1);
}

// Addition of record x to class k: mu_k - (N_k mu_k + x) / (N_k + 1).
Vector AdditionDiff(const Vector& x, const Vector& mu, int64_t nk) {
  return (mu - x) / static_cast<double>(nk + 1);
}

}  // namespace

absl::string_view AdjacencyName(AdjacencyVariant variant) {
  switch (variant) {
    case AdjacencyVariant::kLabelFlip:
      return "label";
    case AdjacencyVariant::kRemoveOne:
      return "remove";
    case AdjacencyVariant::kAddOne:
      return "add";
    case AdjacencyVariant::kFeatureChange:
      return "feature";
  }
  return "label";
}

absl::StatusOr<AdjacencyVariant> ParseAdjacency(absl::string_view name) {
  if (name == "label") return AdjacencyVariant::kLabelFlip;
  if (name == "remove") return AdjacencyVariant::kRemoveOne;
  if (name == "add") return AdjacencyVariant::kAddOne;
  if (name == "feature") return AdjacencyVariant::kFeatureChange;
  return MakeError(ErrorCode::kInvalidArgument,
                   absl::StrCat("unknown adjacency '", name,
                                "'; expected label|remove|add|feature"));
}

absl::StatusOr<AdjacencyMode> AdjacencyMode::Create(
    AdjacencyVariant variant, std::optional<double> clip_bound) {
  const bool needs_bound = variant == AdjacencyVariant::kAddOne ||
                           variant == AdjacencyVariant::kFeatureChange;
  if (clip_bound.has_value() &&
      !(std::isfinite(*clip_bound) && *clip_bound > 0)) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "clip bound must be a finite positive number");
  }
  if (needs_bound && !clip_bound.has_value()) {
    return MakeError(ErrorCode::kInvalidArgument,
                     absl::StrCat("adjacency '", AdjacencyName(variant),
                                  "' requires a clip bound"));
  }
  return AdjacencyMode{variant, clip_bound};
}

size_t AdjacencySet::constraint_count() const {
  size_t total = 0;
  for (const auto& diffs : mean_diffs) total += diffs.size();
  return total;
}

AdjacencySet EnumerateLabelFlip(const LabeledDataset& data,
                                const GmmParams& fit) {
  AdjacencySet adj = EmptySet(fit, AdjacencyMode{});
  const int k = fit.k();
  const auto& sizes = fit.weights.counts;
  for (int i = 0; i < data.n(); ++i) {
    const int src = data.class_of(i);
    const Vector x = data.points().row(i).transpose();
    for (int dst = 0; dst < k; ++dst) {
      if (dst == src) continue;
      if (sizes[src] < 2) {
        ++adj.excluded_flips;
        continue;
      }
      ++adj.admissible_flips;
      adj.mean_diffs[src].push_back(RemovalDiff(x, fit.means[src], sizes[src]));
      adj.mean_diffs[dst].push_back(
          AdditionDiff(x, fit.means[dst], sizes[dst]));
    }
  }
  for (int src = 0; src < k; ++src) {
    if (sizes[src] < 2) continue;
    for (int dst = 0; dst < k; ++dst) {
      if (dst == src) continue;
      WeightCounts neighbor = fit.weights;
      --neighbor.counts[src];
      ++neighbor.counts[dst];
      adj.weight_neighbors.push_back(std::move(neighbor));
    }
  }
  return adj;
}

absl::StatusOr<AdjacencySet> EnumerateRecordLevel(const LabeledDataset& data,
                                                  const GmmParams& fit,
                                                  const AdjacencyMode& mode) {
  AdjacencySet adj = EmptySet(fit, mode);
  const int k = fit.k();
  const auto& sizes = fit.weights.counts;
  switch (mode.variant) {
    case AdjacencyVariant::kLabelFlip:
      return MakeError(ErrorCode::kInvalidArgument,
                       "label adjacency is not record-level");
    case AdjacencyVariant::kRemoveOne: {
      if (mode.clip_bound.has_value()) {
        DPGMM_RETURN_IF_ERROR(CheckClip(data, *mode.clip_bound));
      }
      for (int i = 0; i < data.n(); ++i) {
        const int c = data.class_of(i);
        if (sizes[c] < 2) {
          ++adj.excluded_flips;
          continue;
        }
        ++adj.admissible_flips;
        adj.mean_diffs[c].push_back(
            RemovalDiff(data.points().row(i).transpose(), fit.means[c],
                        sizes[c]));
      }
      for (int c = 0; c < k; ++c) {
        if (sizes[c] < 2) continue;
        WeightCounts neighbor = fit.weights;
        --neighbor.counts[c];
        adj.weight_neighbors.push_back(std::move(neighbor));
      }
      break;
    }
    case AdjacencyVariant::kAddOne: {
      const double b = *mode.clip_bound;
      DPGMM_RETURN_IF_ERROR(CheckClip(data, b));
      for (int c = 0; c < k; ++c) {
        // ||mu_k - (N_k mu_k + x)/(N_k + 1)|| <= (B + ||mu_k||) / (N_k + 1).
        adj.isotropic_radius[c] =
            (b + fit.means[c].norm()) / static_cast<double>(sizes[c] + 1);
        WeightCounts neighbor = fit.weights;
        ++neighbor.counts[c];
        adj.weight_neighbors.push_back(std::move(neighbor));
      }
      adj.admissible_flips = k;
      break;
    }
    case AdjacencyVariant::kFeatureChange: {
      const double b = *mode.clip_bound;
      DPGMM_RETURN_IF_ERROR(CheckClip(data, b));
      for (int c = 0; c < k; ++c) {
        adj.isotropic_radius[c] = 2.0 * b / static_cast<double>(sizes[c]);
      }
      adj.admissible_flips = data.n();
      break;
    }
  }
  return adj;
}

absl::StatusOr<AdjacencySet> EnumerateAdjacency(const LabeledDataset& data,
                                                const GmmParams& fit,
                                                const AdjacencyMode& mode) {
  if (mode.variant == AdjacencyVariant::kLabelFlip) {
    if (mode.clip_bound.has_value()) {
      DPGMM_RETURN_IF_ERROR(CheckClip(data, *mode.clip_bound));
    }
    AdjacencySet adj = EnumerateLabelFlip(data, fit);
    adj.mode = mode;
    return adj;
  }
  return EnumerateRecordLevel(data, fit, mode);
}

absl::StatusOr<AdjacencySet> ApplyUniformBound(const LabeledDataset& data,
                                               AdjacencySet adj, double b) {
  if (!(b > 0)) {
    return MakeError(ErrorCode::kInvalidArgument, "uniform bound needs B > 0");
  }
  DPGMM_RETURN_IF_ERROR(CheckClip(data, b));
  for (int c = 0; c < adj.k(); ++c) {
    const double nk = static_cast<double>(adj.class_sizes[c]);
    double radius = 0.0;
    switch (adj.mode.variant) {
      case AdjacencyVariant::kFeatureChange:
        radius = 2.0 * b / nk;
        break;
      case AdjacencyVariant::kAddOne:
        radius = adj.isotropic_radius[c];
        break;
      case AdjacencyVariant::kLabelFlip:
      case AdjacencyVariant::kRemoveOne:
        // ||x_n - mu_k|| <= 2B for clipped data.
        radius = adj.class_sizes[c] >= 2 ? 2.0 * b / (nk - 1.0)
                                         : 2.0 * b / (nk + 1.0);
        break;
    }
    adj.isotropic_radius[c] = radius;
    adj.mean_diffs[c].clear();
  }
  adj.uniform_bound = true;
  return adj;
}

LabeledDataset ClipDataset(const LabeledDataset& data, double b) {
  Matrix points = data.points();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double norm = points.row(i).norm();
    if (norm <= b) continue;
    double scale = b / norm;
    points.row(i) *= scale;
    // Rounding can leave the norm an ulp above b.
    while (points.row(i).norm() > b) {
      scale = std::nextafter(scale, 0.0);
      points.row(i) = data.points().row(i) * scale;
    }
  }
  // Labels are unchanged, so the invariants already hold.
  return *LabeledDataset::Create(std::move(points), data.labels(), data.k());
}

}  // namespace dpgmm
