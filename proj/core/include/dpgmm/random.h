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

#ifndef DPGMM_RANDOM_H_
#define DPGMM_RANDOM_H_

#include <array>
#include <cstdint>
#include <optional>

namespace dpgmm {

// Counter-based Philox4x32-10 stream. A stream is identified by a 64-bit key;
// Derive() produces statistically independent child streams by key mixing,
// so per-class draws do not depend on the order in which classes are
// processed. Normal variates use the Marsaglia polar method, chi-square
// variates the sum of squared normals.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed);

  // Child stream keyed by (this key, tag).
  RandomStream Derive(uint64_t tag) const;

  uint64_t key() const { return key_; }

  uint32_t NextU32();
  uint64_t NextU64();
  // Uniform on the open interval (0, 1) with 53 random bits.
  double NextUniform();
  // Uniform integer in [0, bound); bound > 0. Rejection sampling, no bias.
  uint64_t NextBelow(uint64_t bound);
  double NextNormal();
  // Chi-square with an integer number of degrees of freedom.
  double NextChiSquare(int dof);
  // Exponential(1).
  double NextExponential();

 private:
  struct KeyTag {};
  RandomStream(KeyTag, uint64_t key);
  void Refill();

  uint64_t key_;
  uint64_t counter_ = 0;
  std::array<uint32_t, 4> block_{};
  int block_pos_ = 4;
  std::optional<double> spare_normal_;
};

// SplitMix64 finalizer; used for seed and key derivation.
uint64_t Mix64(uint64_t x);

}  // namespace dpgmm

#endif  // DPGMM_RANDOM_H_
