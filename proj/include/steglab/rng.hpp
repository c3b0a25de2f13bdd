/*
 * Copyright 2026 The steglab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STEGLAB_RNG_HPP
#define STEGLAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace steglab {

// All randomness in steglab flows through this generator so that runs are
// bit-reproducible across platforms. The algorithms are fixed:
//
//   * state expansion / stream derivation: splitmix64 (Steele et al.)
//   * main stream: xoshiro256** (Blackman & Vigna)
//   * doubles in [0,1): take the top 53 bits, scale by 2^-53
//   * bounded integers: rejection sampling below 2^64 - (2^64 mod n)
//   * gaussians: Box-Muller on two fresh uniforms
//
// std::mt19937 and the std distributions are deliberately not used; the
// standard leaves distribution output unspecified across implementations.

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  /// Derives an independent stream for a named purpose. Streams from
  /// distinct tags never share state with the parent or each other.
  static Rng stream(uint64_t seed, uint64_t tag) {
    uint64_t sm = seed;
    uint64_t mixed = splitmix64(sm) ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
    return Rng(mixed);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [-1, 1).
  double uniform_sym() { return 2.0 * uniform() - 1.0; }

  /// Unbiased uniform integer in [0, n). n must be nonzero.
  uint64_t bounded(uint64_t n) {
    const uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    for (;;) {
      uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // Guard against log(0).
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  bool coin() { return (next_u64() >> 63) != 0; }

  /// Fisher-Yates. Running only the first `prefix` steps yields the same
  /// prefix as a full shuffle, which the embed-plan derivation relies on.
  template <typename T>
  void shuffle_prefix(std::vector<T>& v, size_t prefix) {
    const size_t n = v.size();
    if (n < 2) return;
    const size_t last = std::min(prefix, n - 1);
    for (size_t i = 0; i < last; ++i) {
      const size_t j = i + static_cast<size_t>(bounded(n - i));
      std::swap(v[i], v[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    shuffle_prefix(v, v.size());
  }

private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream tags used to derive independent generators from one master seed.
// Keeping the networks on separate streams means, e.g., that adding or
// removing the steganalyser does not shift the weights G and D start from.
namespace rng_tag {
constexpr uint64_t init_g = 1;
constexpr uint64_t init_d = 2;
constexpr uint64_t init_s = 3;
constexpr uint64_t noise = 4;
constexpr uint64_t data_order = 5;
constexpr uint64_t stego = 6;
constexpr uint64_t split = 7;
constexpr uint64_t messages = 8;
}  // namespace rng_tag

}  // namespace steglab

#endif
