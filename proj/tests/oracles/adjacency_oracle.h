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

// Brute-force neighbors of a labeled dataset: every neighbor is built
// explicitly and its class means recomputed from scratch.

#ifndef DPGMM_TESTS_ORACLES_ADJACENCY_ORACLE_H_
#define DPGMM_TESTS_ORACLES_ADJACENCY_ORACLE_H_

#include <algorithm>
#include <cstdint>
#include <vector>

#include "Eigen/Core"

namespace dpgmm::oracle {

struct BruteNeighbor {
  std::vector<int64_t> counts;
  // Per class, mean(D) - mean(D'); empty for classes the change leaves
  // untouched.
  std::vector<Eigen::VectorXd> mean_diffs;
};

namespace internal {

// Class means from 0-based labels; classes with no member get an empty
// vector.
inline std::vector<Eigen::VectorXd> Means(const Eigen::MatrixXd& x,
                                          const std::vector<int>& labels,
                                          int k) {
  std::vector<Eigen::VectorXd> sum(k, Eigen::VectorXd::Zero(x.cols()));
  std::vector<int> count(k, 0);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (labels[i] < 0) continue;
    sum[labels[i]] += x.row(i).transpose();
    ++count[labels[i]];
  }
  std::vector<Eigen::VectorXd> out(k);
  for (int c = 0; c < k; ++c) {
    if (count[c] > 0) out[c] = sum[c] / count[c];
  }
  return out;
}

inline std::vector<int64_t> Counts(const std::vector<int>& labels, int k) {
  std::vector<int64_t> counts(k, 0);
  for (int l : labels) {
    if (l >= 0) ++counts[l];
  }
  return counts;
}

inline BruteNeighbor Compare(const Eigen::MatrixXd& x,
                             const std::vector<int>& before,
                             const std::vector<int>& after, int k) {
  const auto m0 = Means(x, before, k);
  const auto m1 = Means(x, after, k);
  BruteNeighbor nb;
  nb.counts = Counts(after, k);
  nb.mean_diffs.resize(k);
  const auto c0 = Counts(before, k);
  for (int c = 0; c < k; ++c) {
    if (nb.counts[c] != c0[c] && m1[c].size() > 0) {
      nb.mean_diffs[c] = m0[c] - m1[c];
    }
  }
  return nb;
}

}  // namespace internal

// Every dataset reachable by relabeling one record, skipping relabelings
// that would empty a class. labels are 0-based.
inline std::vector<BruteNeighbor> LabelFlipNeighbors(
    const Eigen::MatrixXd& x, const std::vector<int>& labels, int k) {
  std::vector<BruteNeighbor> out;
  const auto counts = internal::Counts(labels, k);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (counts[labels[i]] < 2) continue;
    for (int target = 0; target < k; ++target) {
      if (target == labels[i]) continue;
      std::vector<int> after = labels;
      after[i] = target;
      out.push_back(internal::Compare(x, labels, after, k));
    }
  }
  return out;
}

// Every dataset reachable by deleting one record from a class with at least
// two members.
inline std::vector<BruteNeighbor> RemoveOneNeighbors(
    const Eigen::MatrixXd& x, const std::vector<int>& labels, int k) {
  std::vector<BruteNeighbor> out;
  const auto counts = internal::Counts(labels, k);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (counts[labels[i]] < 2) continue;
    std::vector<int> after = labels;
    after[i] = -1;
    out.push_back(internal::Compare(x, labels, after, k));
  }
  return out;
}

}  // namespace dpgmm::oracle

#endif  // DPGMM_TESTS_ORACLES_ADJACENCY_ORACLE_H_
