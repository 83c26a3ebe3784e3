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

#include <atomic>

#include "d4/error.hpp"
#include "d4/simd.hpp"
#include "kernels.hpp"

namespace d4::simd {

namespace {

constexpr KernelTable kScalar{Backend::scalar, detail::dot_scalar, detail::accumulate_scalar,
                              detail::scale_scalar};
#if defined(D4_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2{Backend::avx2, detail::dot_avx2, detail::accumulate_avx2,
                            detail::scale_avx2};
#endif
#if defined(D4_HAVE_NEON_KERNELS)
constexpr KernelTable kNeon{Backend::neon, detail::dot_neon, detail::accumulate_neon,
                            detail::scale_neon};
#endif

Backend detect() noexcept {
#if defined(D4_HAVE_AVX2_KERNELS)
  if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
#if defined(D4_HAVE_NEON_KERNELS)
  return Backend::neon;
#endif
  return Backend::scalar;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

bool backend_available(Backend b) noexcept {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2:
#if defined(D4_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::neon:
#if defined(D4_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
    if (backend_available(b)) out.push_back(b);
  }
  return out;
}

const KernelTable& kernels(Backend b) {
  if (!backend_available(b)) {
    throw ValidationError("SIMD backend '" + std::string(backend_name(b)) +
                          "' is not available on this CPU");
  }
  switch (b) {
#if defined(D4_HAVE_AVX2_KERNELS)
    case Backend::avx2: return kAvx2;
#endif
#if defined(D4_HAVE_NEON_KERNELS)
    case Backend::neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& kernels() noexcept {
  const KernelTable* table = g_active.load(std::memory_order_acquire);
  if (table == nullptr) {
    table = &kernels(detect());
    g_active.store(table, std::memory_order_release);
  }
  return *table;
}

Backend active_backend() noexcept { return kernels().backend; }

void set_backend(Backend b) { g_active.store(&kernels(b), std::memory_order_release); }

}  // namespace d4::simd
