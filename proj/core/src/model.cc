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

#include "dpgmm/model.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "dpgmm/random.h"
#include "dpgmm/status.h"

namespace dpgmm {
namespace {

bool ParseDouble(absl::string_view s, double* out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(*out);
}

bool ParseInt(absl::string_view s, int* out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

absl::string_view StripCr(absl::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

// Validates "f0,...,f{d-1}[,label]" and returns d.
absl::StatusOr<int> ParseHeader(absl::string_view header, bool require_label,
                                bool* has_label) {
  std::vector<absl::string_view> cols = absl::StrSplit(header, ',');
  *has_label = !cols.empty() && cols.back() == "label";
  if (require_label && !*has_label) {
    return MakeError(ErrorCode::kParseError,
                     "line 1: header must end with a 'label' column");
  }
  const int d = static_cast<int>(cols.size()) - (*has_label ? 1 : 0);
  if (d < 1) {
    return MakeError(ErrorCode::kParseError,
                     "line 1: header must name at least one feature column");
  }
  for (int j = 0; j < d; ++j) {
    if (cols[j] != absl::StrCat("f", j)) {
      return MakeError(ErrorCode::kParseError,
                       absl::StrCat("line 1: expected column 'f", j,
                                    "', found '", cols[j], "'"));
    }
  }
  return d;
}

struct RawRows {
  std::vector<double> values;
  std::vector<int> labels;
  int d = 0;
};

absl::StatusOr<RawRows> ReadRows(std::istream& in, bool require_label) {
  std::string line;
  if (!std::getline(in, line)) {
    return MakeError(ErrorCode::kParseError, "line 1: missing header");
  }
  bool has_label = false;
  RawRows rows;
  DPGMM_ASSIGN_OR_RETURN(rows.d,
                         ParseHeader(StripCr(line), require_label, &has_label));
  const size_t expected = rows.d + (has_label ? 1 : 0);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = StripCr(line);
    if (view.empty()) continue;
    std::vector<absl::string_view> cols = absl::StrSplit(view, ',');
    if (cols.size() != expected) {
      return MakeError(ErrorCode::kParseError,
                       absl::StrCat("line ", line_no, ": expected ", expected,
                                    " fields, found ", cols.size()));
    }
    for (int j = 0; j < rows.d; ++j) {
      double v;
      if (!ParseDouble(cols[j], &v)) {
        return MakeError(ErrorCode::kParseError,
                         absl::StrCat("line ", line_no, ": bad float '",
                                      cols[j], "'"));
      }
      rows.values.push_back(v);
    }
    if (has_label) {
      int label;
      if (!ParseInt(cols.back(), &label)) {
        if (require_label) {
          return MakeError(ErrorCode::kParseError,
                           absl::StrCat("line ", line_no, ": bad label '",
                                        cols.back(), "'"));
        }
        label = 0;
      }
      rows.labels.push_back(label);
    }
  }
  return rows;
}

Matrix ToMatrix(const RawRows& rows) {
  const int n = static_cast<int>(rows.values.size()) / rows.d;
  Matrix points(n, rows.d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < rows.d; ++j) points(i, j) = rows.values[i * rows.d + j];
  }
  return points;
}

double SquaredDistance(const Matrix& points, int i, const Vector& center) {
  return (points.row(i).transpose() - center).squaredNorm();
}

}  // namespace

absl::StatusOr<WeightCounts> WeightCounts::Create(std::vector<int64_t> counts) {
  if (counts.empty()) {
    return MakeError(ErrorCode::kInvalidArgument, "weights need >= 1 class");
  }
  for (size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 1) {
      return MakeError(ErrorCode::kEmptyClass,
                       absl::StrCat("class ", k + 1, " has count ", counts[k]));
    }
  }
  return WeightCounts{std::move(counts)};
}

int64_t WeightCounts::total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

bool WeightCounts::InLattice(int64_t n) const {
  for (int64_t c : counts) {
    if (c < 1) return false;
  }
  return total() == n;
}

absl::StatusOr<LabeledDataset> LabeledDataset::Create(Matrix points,
                                                      std::vector<int> labels,
                                                      int k) {
  if (k < 1) {
    return MakeError(ErrorCode::kInvalidArgument,
                     absl::StrCat("k must be >= 1, got ", k));
  }
  if (static_cast<size_t>(points.rows()) != labels.size()) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "points and labels differ in length");
  }
  if (points.rows() < k) {
    return MakeError(ErrorCode::kEmptyClass,
                     absl::StrCat("N=", points.rows(), " is smaller than K=", k));
  }
  std::vector<int64_t> sizes(k, 0);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > k) {
      return MakeError(ErrorCode::kLabelOutOfRange,
                       absl::StrCat("record ", i + 1, " has label ", labels[i],
                                    ", expected 1..", k));
    }
    ++sizes[labels[i] - 1];
  }
  for (int c = 0; c < k; ++c) {
    if (sizes[c] == 0) {
      return MakeError(ErrorCode::kEmptyClass,
                       absl::StrCat("class ", c + 1, " has no members"));
    }
  }
  return LabeledDataset(std::move(points), std::move(labels), k);
}

std::vector<int64_t> LabeledDataset::class_sizes() const {
  std::vector<int64_t> sizes(k_, 0);
  for (int label : labels_) ++sizes[label - 1];
  return sizes;
}

absl::StatusOr<LabeledDataset> ParseDatasetCsv(std::istream& in, int k) {
  DPGMM_ASSIGN_OR_RETURN(RawRows rows, ReadRows(in, /*require_label=*/true));
  return LabeledDataset::Create(ToMatrix(rows), std::move(rows.labels), k);
}

absl::StatusOr<LabeledDataset> LoadDataset(const std::string& path, int k) {
  std::ifstream in(path);
  if (!in) {
    return MakeError(ErrorCode::kIoError, absl::StrCat("cannot open ", path));
  }
  return ParseDatasetCsv(in, k);
}

absl::StatusOr<Matrix> ParseFeaturesCsv(std::istream& in) {
  DPGMM_ASSIGN_OR_RETURN(RawRows rows, ReadRows(in, /*require_label=*/false));
  return ToMatrix(rows);
}

absl::StatusOr<Matrix> LoadFeatures(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return MakeError(ErrorCode::kIoError, absl::StrCat("cannot open ", path));
  }
  return ParseFeaturesCsv(in);
}

void WriteDatasetCsv(std::ostream& out, const Matrix& points,
                     const std::vector<int>& labels) {
  for (Eigen::Index j = 0; j < points.cols(); ++j) out << 'f' << j << ',';
  out << "label\n";
  char buf[32];
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", points(i, j));
      out << buf << ',';
    }
    out << labels[i] << '\n';
  }
}

absl::StatusOr<GmmParams> FitGmm(const LabeledDataset& data) {
  const int k = data.k();
  const int d = data.d();
  const std::vector<int64_t> sizes = data.class_sizes();
  for (int c = 0; c < k; ++c) {
    if (sizes[c] < 2) {
      return MakeError(ErrorCode::kDegenerateClass,
                       absl::StrCat("class ", c + 1, " has ", sizes[c],
                                    " member(s); covariance needs >= 2"));
    }
  }
  GmmParams fit;
  DPGMM_ASSIGN_OR_RETURN(fit.weights, WeightCounts::Create(sizes));
  fit.means.assign(k, Vector::Zero(d));
  for (int i = 0; i < data.n(); ++i) {
    fit.means[data.class_of(i)] += data.points().row(i).transpose();
  }
  for (int c = 0; c < k; ++c) fit.means[c] /= static_cast<double>(sizes[c]);

  std::vector<Matrix> scatter(k, Matrix::Zero(d, d));
  for (int i = 0; i < data.n(); ++i) {
    const int c = data.class_of(i);
    const Vector centered = data.points().row(i).transpose() - fit.means[c];
    scatter[c].noalias() += centered * centered.transpose();
  }
  fit.covs.reserve(k);
  for (int c = 0; c < k; ++c) {
    SymMatrix cov(Matrix(scatter[c] / static_cast<double>(sizes[c] - 1)));
    if (!IsPositiveDefinite(cov)) {
      double rho = std::max(1e-8 * cov.trace() / d, 1e-12);
      SymMatrix ridged = cov + SymMatrix::Identity(d) * rho;
      while (!IsPositiveDefinite(ridged)) {
        rho *= 10.0;
        ridged = cov + SymMatrix::Identity(d) * rho;
      }
      fit.regularization = std::max(fit.regularization, rho);
      cov = ridged;
    }
    fit.covs.push_back(std::move(cov));
  }
  return fit;
}

std::vector<int> KMeansLabel(const Matrix& points, int k, uint64_t seed,
                             int max_iter) {
  const int n = static_cast<int>(points.rows());
  k = std::max(1, std::min(k, n));
  std::vector<int> assign(n, 0);
  if (k == 1) return std::vector<int>(n, 1);

  RandomStream rng(seed);
  std::vector<Vector> centers;
  centers.reserve(k);
  centers.push_back(points.row(rng.NextBelow(n)).transpose());
  std::vector<double> dist2(n);
  for (int i = 0; i < n; ++i) dist2[i] = SquaredDistance(points, i, centers[0]);
  while (static_cast<int>(centers.size()) < k) {
    const double total = std::accumulate(dist2.begin(), dist2.end(), 0.0);
    int pick = 0;
    if (total > 0.0) {
      double u = rng.NextUniform() * total;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        if (dist2[i] <= 0.0) continue;
        u -= dist2[i];
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
      if (dist2[pick] <= 0.0) {
        pick = static_cast<int>(
            std::max_element(dist2.begin(), dist2.end()) - dist2.begin());
      }
    }
    centers.push_back(points.row(pick).transpose());
    for (int i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], SquaredDistance(points, i, centers.back()));
    }
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = iter == 0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dd = SquaredDistance(points, i, centers[c]);
        if (dd < best_d) {
          best_d = dd;
          best = c;
        }
      }
      if (best != assign[i]) {
        assign[i] = best;
        changed = true;
      }
    }
    // Empty clusters take the point farthest from its current center, taken
    // from a cluster that keeps at least one member.
    std::vector<int> sizes(k, 0);
    for (int a : assign) ++sizes[a];
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      int far = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (sizes[assign[i]] < 2) continue;
        const double dd = SquaredDistance(points, i, centers[assign[i]]);
        if (dd > far_d) {
          far_d = dd;
          far = i;
        }
      }
      --sizes[assign[far]];
      assign[far] = c;
      sizes[c] = 1;
      changed = true;
    }
    for (int c = 0; c < k; ++c) centers[c].setZero();
    for (int i = 0; i < n; ++i) centers[assign[i]] += points.row(i).transpose();
    for (int c = 0; c < k; ++c) centers[c] /= static_cast<double>(sizes[c]);
    if (!changed) break;
  }
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = assign[i] + 1;
  return labels;
}

LatticeSize LatticeCardinality(int64_t n, int k) {
  using boost::multiprecision::cpp_int;
  LatticeSize out;
  const int64_t top = n - 1;
  const int64_t choose = k - 1;
  cpp_int value = 1;
  for (int64_t i = 1; i <= choose; ++i) {
    value *= (top - choose + i);
    value /= i;
  }
  out.value = value;
  out.log_value = std::lgamma(static_cast<double>(top + 1)) -
                  std::lgamma(static_cast<double>(choose + 1)) -
                  std::lgamma(static_cast<double>(top - choose + 1));
  return out;
}

}  // namespace dpgmm
