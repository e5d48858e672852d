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

// Labeled datasets, the non-private histogram / sample-statistics GMM fit,
// the 1/N weight lattice and K-means pre-labeling.

#ifndef DPGMM_MODEL_H_
#define DPGMM_MODEL_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "boost/multiprecision/cpp_int.hpp"
#include "dpgmm/linalg.h"

namespace dpgmm {

// Mixture weights stored as integer class counts; weight k is
// counts[k] / total(). Exact lattice membership is preserved because nothing
// is ever stored as a float.
struct WeightCounts {
  std::vector<int64_t> counts;

  static absl::StatusOr<WeightCounts> Create(std::vector<int64_t> counts);

  int k() const { return static_cast<int>(counts.size()); }
  int64_t total() const;
  double weight(int cls) const {
    return static_cast<double>(counts[cls]) / static_cast<double>(total());
  }
  // Every count >= 1 and the counts sum to n.
  bool InLattice(int64_t n) const;

  bool operator==(const WeightCounts&) const = default;
  auto operator<=>(const WeightCounts&) const = default;
};

class LabeledDataset {
 public:
  // points: N x d, one row per record. labels: 1-based class ids.
  static absl::StatusOr<LabeledDataset> Create(Matrix points,
                                               std::vector<int> labels, int k);

  const Matrix& points() const { return points_; }
  const std::vector<int>& labels() const { return labels_; }
  int n() const { return static_cast<int>(points_.rows()); }
  int d() const { return static_cast<int>(points_.cols()); }
  int k() const { return k_; }
  // 0-based class index of record i.
  int class_of(int i) const { return labels_[i] - 1; }
  std::vector<int64_t> class_sizes() const;

 private:
  LabeledDataset(Matrix points, std::vector<int> labels, int k)
      : points_(std::move(points)), labels_(std::move(labels)), k_(k) {}

  Matrix points_;
  std::vector<int> labels_;
  int k_ = 0;
};

struct GmmParams {
  WeightCounts weights;
  std::vector<Vector> means;
  std::vector<SymMatrix> covs;
  // Largest ridge added to any class covariance to make it PD (0 if none).
  double regularization = 0.0;

  int k() const { return weights.k(); }
  int d() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
  int64_t n() const { return weights.total(); }
};

// Parses the dataset CSV: header "f0,...,f{d-1},label", then rows of d
// decimal floats followed by a 1-based integer label.
absl::StatusOr<LabeledDataset> ParseDatasetCsv(std::istream& in, int k);
absl::StatusOr<LabeledDataset> LoadDataset(const std::string& path, int k);

// Reads only the feature columns; a trailing label column is accepted and
// ignored. Used ahead of K-means labeling.
absl::StatusOr<Matrix> ParseFeaturesCsv(std::istream& in);
absl::StatusOr<Matrix> LoadFeatures(const std::string& path);

void WriteDatasetCsv(std::ostream& out, const Matrix& points,
                     const std::vector<int>& labels);

// Histogram weights, class sample means and class sample covariances with
// denominator N_k - 1. A covariance that fails the PD check gets a ridge
// rho * I, rho = max(1e-8 * trace / d, 1e-12), grown tenfold until PD.
absl::StatusOr<GmmParams> FitGmm(const LabeledDataset& data);

// Lloyd's algorithm with k-means++ seeding drawn from a seeded stream.
// Returns 1-based labels; every cluster is nonempty.
std::vector<int> KMeansLabel(const Matrix& points, int k, uint64_t seed,
                             int max_iter = 100);

struct LatticeSize {
  boost::multiprecision::cpp_int value;
  double log_value = 0.0;
};

// |S| = C(n - 1, k - 1), exact, plus its natural logarithm.
LatticeSize LatticeCardinality(int64_t n, int k);

}  // namespace dpgmm

#endif  // DPGMM_MODEL_H_
