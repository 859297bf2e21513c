// Copyright 2026 The Gestural Chart Engine Authors
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

#pragma once

// Portable seeded randomness. Standard library distributions are not
// specified bit-for-bit across implementations, so everything that must be
// reproducible from a seed (dataset generation, tracker jitter) draws from
// this stream instead.
//
// Mixer: splitmix64 (increment 0x9E3779B97F4A7C15, multipliers
// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB, shifts 30/27/31).
// Uniform doubles take the top 53 bits. Normals use Box-Muller (cosine
// branch only, one normal per two uniforms).

#include <cmath>
#include <cstdint>

namespace gce {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  constexpr explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
  }

  /// Uniform in [0, 1).
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  constexpr std::uint64_t state() const { return state_; }
  constexpr bool operator==(const SplitMix64&) const = default;

 private:
  std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a tuple of keys.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                           std::uint64_t c = 0) {
  std::uint64_t h = splitmix64_mix(seed ^ 0x243F6A8885A308D3ULL);
  h = splitmix64_mix(h ^ (a + 0x13198A2E03707344ULL));
  h = splitmix64_mix(h ^ (b + 0xA4093822299F31D0ULL));
  h = splitmix64_mix(h ^ (c + 0x082EFA98EC4E6C89ULL));
  return h;
}

}  // namespace gce
