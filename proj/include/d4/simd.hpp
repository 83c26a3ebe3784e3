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

// Data-parallel inner loops used by clustering, deduplication and
// nearest-neighbour search. Each kernel has a scalar reference and optional
// AVX2 / NEON variants selected once at startup from the running CPU.
//
// All backends are bit-identical. The dot product accumulates into eight
// float lanes (lane j takes elements i with i % 8 == j), reduces the lanes
// as ((l0+l4)+(l2+l6)) + ((l1+l5)+(l3+l7)), then adds the tail elements in
// order. No backend uses fused multiply-add. Element-wise kernels are exact
// per element. Selection outputs therefore do not depend on the machine.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace d4::simd {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend b) noexcept;
bool backend_available(Backend b) noexcept;
std::vector<Backend> available_backends();

/// Backend used by the free functions below.
Backend active_backend() noexcept;
/// Throws ValidationError if the backend is not available on this CPU.
void set_backend(Backend b);

struct KernelTable {
  Backend backend;
  float (*dot)(const float* a, const float* b, std::size_t d);
  /// acc[i] += x[i] in double precision.
  void (*accumulate)(double* acc, const float* x, std::size_t d);
  /// x[i] *= s.
  void (*scale)(float* x, std::size_t d, float s);
};

/// Kernels for a specific backend, for equivalence testing.
const KernelTable& kernels(Backend b);
const KernelTable& kernels() noexcept;

inline float dot(std::span<const float> a, std::span<const float> b) noexcept {
  return kernels().dot(a.data(), b.data(), a.size());
}
inline void accumulate(std::span<double> acc, std::span<const float> x) noexcept {
  kernels().accumulate(acc.data(), x.data(), x.size());
}
inline void scale(std::span<float> x, float s) noexcept {
  kernels().scale(x.data(), x.size(), s);
}

}  // namespace d4::simd
