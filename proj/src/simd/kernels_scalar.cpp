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

#include "kernels.hpp"

namespace d4::simd::detail {

float dot_scalar(const float* a, const float* b, std::size_t d) {
  float lanes[8] = {0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f};
  std::size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) lanes[j] += a[i + j] * b[i + j];
  }
  const float s0 = lanes[0] + lanes[4];
  const float s1 = lanes[1] + lanes[5];
  const float s2 = lanes[2] + lanes[6];
  const float s3 = lanes[3] + lanes[7];
  float r = (s0 + s2) + (s1 + s3);
  for (; i < d; ++i) r += a[i] * b[i];
  return r;
}

void accumulate_scalar(double* acc, const float* x, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i) acc[i] += static_cast<double>(x[i]);
}

void scale_scalar(float* x, std::size_t d, float s) {
  for (std::size_t i = 0; i < d; ++i) x[i] *= s;
}

}  // namespace d4::simd::detail
