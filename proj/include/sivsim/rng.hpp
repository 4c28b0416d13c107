// Copyright 2026 The sivsim Authors
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

#pragma once

#include <cmath>
#include <cstdint>

namespace sivsim {

// Deterministic, platform-independent random numbers.  std::mt19937 would be
// portable too, but the distributions (normal, poisson) are not specified
// bit-for-bit by the standard, so golden outputs would depend on the
// standard library.  splitmix64 plus explicit Box-Muller keeps every sampled
// number identical across compilers and lets sweep points derive independent
// streams from (master seed, point index) without coordination.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1) with 53 bits of mantissa
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // strictly positive uniform, safe inside log()
  double next_open_double() {
    double u = next_double();
    while (u <= 0.0) u = next_double();
    return u;
  }

  // standard normal via Box-Muller (one value per call; the partner draw is
  // discarded so the stream layout stays trivial to reason about)
  double next_normal() {
    const double u1 = next_open_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // poisson sample: Knuth's product method for small means, rounded normal
  // approximation above (the readout bins hit thousands of counts, where the
  // relative error of the approximation is far below shot noise)
  std::uint64_t next_poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 60.0) {
      const double limit = std::exp(-mean);
      double prod = 1.0;
      std::uint64_t k = 0;
      do {
        prod *= next_open_double();
        ++k;
      } while (prod > limit);
      return k - 1;
    }
    const double v = mean + std::sqrt(mean) * next_normal();
    return v > 0.0 ? static_cast<std::uint64_t>(std::llround(v)) : 0;
  }
};

// Derives an independent stream for a substream index (sweep point, shot):
// one extra splitmix scramble of the combined words decorrelates streams
// whose seeds differ by small integers.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 mix(master ^ (0x5851f42d4c957f2dull * (index + 1)));
  mix.next_u64();
  return mix.next_u64();
}

}  // namespace sivsim
