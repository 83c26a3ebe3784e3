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

#include <cstddef>

namespace d4::simd::detail {

float dot_scalar(const float* a, const float* b, std::size_t d);
void accumulate_scalar(double* acc, const float* x, std::size_t d);
void scale_scalar(float* x, std::size_t d, float s);

#if defined(D4_HAVE_AVX2_KERNELS)
float dot_avx2(const float* a, const float* b, std::size_t d);
void accumulate_avx2(double* acc, const float* x, std::size_t d);
void scale_avx2(float* x, std::size_t d, float s);
#endif

#if defined(D4_HAVE_NEON_KERNELS)
float dot_neon(const float* a, const float* b, std::size_t d);
void accumulate_neon(double* acc, const float* x, std::size_t d);
void scale_neon(float* x, std::size_t d, float s);
#endif

}  // namespace d4::simd::detail
