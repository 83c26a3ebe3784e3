// Copyright 2026 The d4curate Authors.
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

// Portable, seedable randomness and string hashing. The standard
// distributions are implementation-defined, so every draw that affects an
// output goes through these helpers to keep results identical across
// platforms and standard libraries.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace d4 {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded 64-bit hash of a byte string (FNV-1a core, splitmix finalizer).
std::uint64_t hash64(std::string_view bytes, std::uint64_t seed = 0) noexcept;

/// Derives an independent seed for a named pipeline stage.
std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) noexcept;

/// xoshiro256** seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t s_[4];
};

/// k distinct indices drawn uniformly from [0, n), returned ascending.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng);

/// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace d4
