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
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "d4/embed.hpp"

namespace d4 {

struct KmeansConfig {
  std::size_t k = 1;
  std::size_t iters = 20;
  std::uint64_t seed = 0;
  // Balancing is never attempted: the only supported values are a minimum of
  // one point per centroid (enforced by empty-cluster repair) and an
  // unbounded maximum.
  std::size_t min_points_per_centroid = 1;
  std::size_t max_points_per_centroid = std::numeric_limits<std::size_t>::max();

  void validate(std::size_t n) const;
};

/// k unit-norm centroids plus each point's assigned cluster and cosine
/// distance 1 − dot(point, centroid).
struct Clustering {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<float> centroids;  // k × dim, row-major
  std::vector<std::uint32_t> assignment;
  std::vector<float> distance;
  std::size_t iters_run = 0;
  std::uint64_t seed = 0;
  /// Objective after every assignment step (initial one included).
  std::vector<double> objective_history;

  std::size_t n() const noexcept { return assignment.size(); }
  std::span<const float> centroid(std::size_t j) const noexcept {
    return {centroids.data() + j * dim, dim};
  }
  std::vector<std::size_t> cluster_sizes() const;
  /// Member rows per cluster in ascending order.
  std::vector<std::vector<std::size_t>> members() const;
  /// Checks shape, index range and centroid norms; with emb also checks that
  /// stored distances match 1 − dot within 1e-5.
  void validate() const;
  void validate(const EmbeddingMatrix& emb) const;
};

/// round(√n), at least 1.
std::size_t default_k(std::size_t n);

struct Assignment {
  std::vector<std::uint32_t> cluster;
  std::vector<float> distance;
};

/// Nearest centroid by dot product, ties to the lowest centroid index.
/// centroids is k × emb.dim() and must be unit-norm.
Assignment assign(const EmbeddingMatrix& emb, std::span<const float> centroids, std::size_t k);

/// Σ distance[i].
double objective(const EmbeddingMatrix& emb, const Clustering& clustering);

/// Spherical Lloyd iterations from k distinct rows sampled under cfg.seed.
/// Stops after cfg.iters updates or when the assignment no longer changes.
/// An empty cluster is reseeded with the point farthest from its centroid
/// (taken from a cluster with at least two members).
Clustering kmeans_spherical(const EmbeddingMatrix& emb, const KmeansConfig& cfg);

/// As kmeans_spherical, starting from the given k × dim centroids.
Clustering kmeans_spherical_from(const EmbeddingMatrix& emb, std::vector<float> initial_centroids,
                                 const KmeansConfig& cfg);

/// Same centroids, assignment and distances restricted to the given rows.
Clustering restrict_clustering(const Clustering& c, std::span<const std::size_t> rows);

/// Binary format, little-endian:
///   "D4KM" | version u32 = 1 | k u32 | d u32 | n u64 | k×d f32 centroids
///   | n u32 assignment | n f32 distances
std::vector<std::uint8_t> encode_clustering(const Clustering& c);
Clustering decode_clustering(std::span<const std::uint8_t> bytes);
void write_clustering(const Clustering& c, const std::filesystem::path& path);
Clustering read_clustering(const std::filesystem::path& path);

}  // namespace d4
