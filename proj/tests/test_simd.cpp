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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <cstring>
#include <vector>

#include "d4/error.hpp"
#include "d4/random.hpp"
#include "d4/simd.hpp"
#include "oracles.hpp"

using namespace d4;

namespace {

std::vector<float> random_floats(std::size_t n, Rng& rng) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform() * 2.0 - 1.0);
  return v;
}

bool same_bits(float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); }

}  // namespace

TEST_CASE("scalar backend is always available and listed first") {
  const auto all = simd::available_backends();
  REQUIRE_FALSE(all.empty());
  CHECK(all.front() == simd::Backend::scalar);
  CHECK(simd::backend_available(simd::Backend::scalar));
}

TEST_CASE("every backend's dot is bit-identical to the scalar kernel") {
  Rng rng(7);
  const auto& ref = simd::kernels(simd::Backend::scalar);
  for (auto b : simd::available_backends()) {
    const auto& k = simd::kernels(b);
    CAPTURE(simd::backend_name(b));
    for (std::size_t n = 0; n <= 70; ++n) {
      for (int rep = 0; rep < 5; ++rep) {
        const auto x = random_floats(n, rng);
        const auto y = random_floats(n, rng);
        CHECK(same_bits(k.dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n)));
      }
    }
    const auto x = random_floats(1027, rng);
    const auto y = random_floats(1027, rng);
    CHECK(same_bits(k.dot(x.data(), y.data(), 1027), ref.dot(x.data(), y.data(), 1027)));
  }
}

TEST_CASE("every backend's accumulate and scale are bit-identical to scalar") {
  Rng rng(11);
  const auto& ref = simd::kernels(simd::Backend::scalar);
  for (auto b : simd::available_backends()) {
    const auto& k = simd::kernels(b);
    for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 31u, 256u, 257u}) {
      const auto x = random_floats(n, rng);
      std::vector<double> a1(n, 0.25), a2(n, 0.25);
      ref.accumulate(a1.data(), x.data(), n);
      k.accumulate(a2.data(), x.data(), n);
      CHECK(std::memcmp(a1.data(), a2.data(), n * sizeof(double)) == 0);

      auto s1 = x, s2 = x;
      ref.scale(s1.data(), n, 0.37f);
      k.scale(s2.data(), n, 0.37f);
      CHECK(std::memcmp(s1.data(), s2.data(), n * sizeof(float)) == 0);
    }
  }
}

TEST_CASE("scalar dot agrees with a double-precision reference") {
  Rng rng(3);
  const auto& ref = simd::kernels(simd::Backend::scalar);
  for (std::size_t n : {1u, 5u, 64u, 300u, 1000u}) {
    const auto x = random_floats(n, rng);
    const auto y = random_floats(n, rng);
    const double exact = oracle::dot(x, y);
    CHECK(ref.dot(x.data(), y.data(), n) == doctest::Approx(exact).epsilon(1e-5));
  }
}

TEST_CASE("set_backend switches the active table and rejects missing backends") {
  const auto before = simd::active_backend();
  for (auto b : {simd::Backend::scalar, simd::Backend::avx2, simd::Backend::neon}) {
    if (simd::backend_available(b)) {
      simd::set_backend(b);
      CHECK(simd::active_backend() == b);
      CHECK(simd::kernels().backend == b);
    } else {
      CHECK_THROWS_AS(simd::set_backend(b), ValidationError);
    }
  }
  simd::set_backend(before);
}
