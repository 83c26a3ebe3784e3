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

#include <arm_neon.h>

#include "kernels.hpp"

namespace d4::simd::detail {

float dot_neon(const float* a, const float* b, std::size_t d) {
  // Two quad registers model the eight reference lanes. vmulq + vaddq, never
  // vfmaq, so rounding matches the scalar kernel.
  float32x4_t lo = vdupq_n_f32(0.f);
  float32x4_t hi = vdupq_n_f32(0.f);
  std::size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    lo = vaddq_f32(lo, vmulq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
    hi = vaddq_f32(hi, vmulq_f32(vld1q_f32(a + i + 4), vld1q_f32(b + i + 4)));
  }
  const float32x4_t s = vaddq_f32(lo, hi);
  const float32x2_t t = vadd_f32(vget_low_f32(s), vget_high_f32(s));
  float r = vget_lane_f32(t, 0) + vget_lane_f32(t, 1);
  for (; i < d; ++i) r += a[i] * b[i];
  return r;
}

void accumulate_neon(double* acc, const float* x, std::size_t d) {
  std::size_t i = 0;
  for (; i + 2 <= d; i += 2) {
    const float64x2_t wide = vcvt_f64_f32(vld1_f32(x + i));
    vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), wide));
  }
  for (; i < d; ++i) acc[i] += static_cast<double>(x[i]);
}

void scale_neon(float* x, std::size_t d, float s) {
  std::size_t i = 0;
  for (; i + 4 <= d; i += 4) vst1q_f32(x + i, vmulq_n_f32(vld1q_f32(x + i), s));
  for (; i < d; ++i) x[i] *= s;
}

}  // namespace d4::simd::detail
