// Copyright 2026 The Histoseg Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HISTOSEG_RNG_HPP_
#define HISTOSEG_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace histoseg {

/// PCG32 generator (O'Neill). Self-contained so that seeded pipelines
/// produce the same stream on every platform and standard library.
class Rng {
 public:
  struct State {
    std::uint64_t state = 0;
    std::uint64_t inc = 0;
    bool has_gauss = false;
    double gauss_spare = 0.0;
  };

  explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL,
               std::uint64_t seq = 0xda3e39cb94b95bdbULL) {
    s_.state = 0;
    s_.inc = (seq << 1u) | 1u;
    next_u32();
    s_.state += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = s_.state;
    s_.state = old * 6364136223846793005ULL + s_.inc;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform integer in [0, bound) without modulo bias.
  std::uint32_t uniform_int(std::uint32_t bound) {
    std::uint32_t threshold = (-bound) % bound;
    for (;;) {
      std::uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller, caching the spare deviate.
  double normal() {
    if (s_.has_gauss) {
      s_.has_gauss = false;
      return s_.gauss_spare;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    s_.gauss_spare = r * std::sin(theta);
    s_.has_gauss = true;
    return r * std::cos(theta);
  }

  /// Fisher-Yates shuffle of a random-access container.
  template <typename Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      std::size_t j = uniform_int(static_cast<std::uint32_t>(i));
      using std::swap;
      swap(c[i - 1], c[j]);
    }
  }

  State state() const { return s_; }
  void set_state(const State& s) { s_ = s; }

 private:
  State s_;
};

/// FNV-1a 64-bit hash; used to fingerprint configuration documents.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace histoseg

#endif  // HISTOSEG_RNG_HPP_
