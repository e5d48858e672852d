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

#include "dpgmm/random.h"

#include <cmath>

namespace dpgmm {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void MulHiLo(uint32_t a, uint32_t b, uint32_t* hi, uint32_t* lo) {
  const uint64_t p = static_cast<uint64_t>(a) * b;
  *hi = static_cast<uint32_t>(p >> 32);
  *lo = static_cast<uint32_t>(p);
}

std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> ctr,
                                   std::array<uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kPhiloxM0, ctr[0], &hi0, &lo0);
    MulHiLo(kPhiloxM1, ctr[2], &hi1, &lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

}  // namespace

uint64_t Mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(uint64_t seed) : key_(Mix64(seed)) {}

RandomStream::RandomStream(KeyTag, uint64_t key) : key_(key) {}

RandomStream RandomStream::Derive(uint64_t tag) const {
  return RandomStream(KeyTag{}, Mix64(key_ ^ Mix64(tag + 0x632BE59BD9B4E019ull)));
}

void RandomStream::Refill() {
  const std::array<uint32_t, 4> ctr = {
      static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32),
      0u, 0u};
  const std::array<uint32_t, 2> key = {static_cast<uint32_t>(key_),
                                       static_cast<uint32_t>(key_ >> 32)};
  block_ = Philox4x32(ctr, key);
  ++counter_;
  block_pos_ = 0;
}

uint32_t RandomStream::NextU32() {
  if (block_pos_ >= 4) Refill();
  return block_[block_pos_++];
}

uint64_t RandomStream::NextU64() {
  const uint64_t hi = NextU32();
  const uint64_t lo = NextU32();
  return (hi << 32) | lo;
}

double RandomStream::NextUniform() {
  // (k + 0.5) / 2^53 lies strictly inside (0, 1).
  const uint64_t bits = NextU64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

uint64_t RandomStream::NextBelow(uint64_t bound) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % bound;
}

double RandomStream::NextNormal() {
  if (spare_normal_.has_value()) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  double u, v, s;
  do {
    u = 2.0 * NextUniform() - 1.0;
    v = 2.0 * NextUniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  return u * f;
}

double RandomStream::NextChiSquare(int dof) {
  double acc = 0.0;
  for (int i = 0; i < dof; ++i) {
    const double z = NextNormal();
    acc += z * z;
  }
  return acc;
}

double RandomStream::NextExponential() { return -std::log(NextUniform()); }

}  // namespace dpgmm
