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

// Shared fixtures for the unit tests.
#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "d4/corpus.hpp"
#include "d4/embed.hpp"
#include "d4/random.hpp"

namespace fixture {

/// Fresh directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("d4test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& content) {
  std::ofstream(p, std::ios::binary) << content;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string id(std::size_t i) {
  std::string num = std::to_string(i);
  return "p" + std::string(num.size() < 6 ? 6 - num.size() : 0, '0') + num;
}

inline std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(id(i));
  return out;
}

/// Builds a normalized matrix from raw rows.
inline d4::EmbeddingMatrix matrix(const std::vector<std::vector<float>>& rows) {
  const std::size_t d = rows.front().size();
  std::vector<float> data;
  for (auto row : rows) {
    d4::normalize_or_sentinel(row);
    data.insert(data.end(), row.begin(), row.end());
  }
  return d4::EmbeddingMatrix(d, ids(rows.size()), std::move(data), true);
}

/// Gaussian-ish random unit vectors (sum of uniforms).
inline d4::EmbeddingMatrix random_unit(std::size_t n, std::size_t d, std::uint64_t seed) {
  d4::Rng rng(seed);
  std::vector<std::vector<float>> rows(n, std::vector<float>(d));
  for (auto& row : rows) {
    for (auto& v : row) v = static_cast<float>(rng.uniform() + rng.uniform() + rng.uniform() - 1.5);
  }
  return matrix(rows);
}

/// Points scattered around a few random directions, so clusters are real.
inline d4::EmbeddingMatrix blobs(std::size_t n, std::size_t d, std::size_t centers, double spread,
                                 std::uint64_t seed) {
  d4::Rng rng(seed);
  std::vector<std::vector<float>> dirs(centers, std::vector<float>(d));
  for (auto& c : dirs) {
    for (auto& v : c) v = static_cast<float>(rng.uniform() - 0.5);
    d4::normalize_or_sentinel(c);
  }
  std::vector<std::vector<float>> rows(n, std::vector<float>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = dirs[rng.below(centers)];
    for (std::size_t j = 0; j < d; ++j) {
      rows[i][j] = c[j] + static_cast<float>(spread * (rng.uniform() - 0.5));
    }
  }
  return matrix(rows);
}

/// 20 template groups of 5 near-copies (mutation 0.01) among 900 topic
/// documents.
inline d4::SynthSpec planted_spec(std::uint64_t seed = 0) {
  d4::SynthSpec s;
  s.n_topics = 18;
  s.docs_per_topic = 50;
  s.n_template_groups = 20;
  s.dupes_per_group = 5;
  s.template_mutation_rate = 0.01;
  s.seed = seed;
  return s;
}

}  // namespace fixture
