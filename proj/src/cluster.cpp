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

#include "d4/cluster.hpp"

#include <algorithm>
#include <cmath>

#include "binary_io.hpp"
#include "d4/error.hpp"
#include "d4/parallel.hpp"
#include "d4/random.hpp"
#include "d4/simd.hpp"

namespace d4 {

namespace {

constexpr std::uint32_t kClusteringVersion = 1;

float cosine_distance(float dot) {
  return static_cast<float>(std::clamp(1.0 - static_cast<double>(dot), 0.0, 2.0));
}

Assignment assign_unchecked(const EmbeddingMatrix& emb, std::span<const float> centroids,
                            std::size_t k) {
  const std::size_t d = emb.dim();
  Assignment out{std::vector<std::uint32_t>(emb.n()), std::vector<float>(emb.n())};
  parallel_for(emb.n(), [&](std::size_t i) {
    const auto x = emb.row(i);
    std::size_t best = 0;
    float best_dot = simd::dot(x, centroids.subspan(0, d));
    for (std::size_t j = 1; j < k; ++j) {
      const float v = simd::dot(x, centroids.subspan(j * d, d));
      if (v > best_dot) {
        best_dot = v;
        best = j;
      }
    }
    out.cluster[i] = static_cast<std::uint32_t>(best);
    out.distance[i] = cosine_distance(best_dot);
  });
  return out;
}

void repair_empty_clusters(const EmbeddingMatrix& emb, std::vector<float>& centroids,
                           std::size_t k, Assignment& a) {
  const std::size_t d = emb.dim();
  std::vector<std::size_t> sizes(k, 0);
  for (auto c : a.cluster) ++sizes[c];
  for (std::size_t empty = 0; empty < k; ++empty) {
    if (sizes[empty] != 0) continue;
    std::size_t donor = emb.n();
    for (std::size_t i = 0; i < emb.n(); ++i) {
      if (sizes[a.cluster[i]] < 2) continue;
      if (donor == emb.n() || a.distance[i] > a.distance[donor]) donor = i;
    }
    if (donor == emb.n()) throw Error("empty-cluster repair found no donor point");
    const auto x = emb.row(donor);
    std::copy(x.begin(), x.end(), centroids.begin() + static_cast<std::ptrdiff_t>(empty * d));
    --sizes[a.cluster[donor]];
    ++sizes[empty];
    a.cluster[donor] = static_cast<std::uint32_t>(empty);
    a.distance[donor] = cosine_distance(simd::dot(x, x));
  }
}

void update_centroids(const EmbeddingMatrix& emb, const std::vector<std::uint32_t>& cluster,
                      std::size_t k, std::vector<float>& centroids) {
  const std::size_t d = emb.dim();
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < cluster.size(); ++i) members[cluster[i]].push_back(i);

  // Each cluster sums its members in row order, so the result does not
  // depend on how clusters are spread over threads.
  parallel_for(k, [&](std::size_t j) {
    if (members[j].empty()) return;
    std::vector<double> sum(d, 0.0);
    for (std::size_t i : members[j]) simd::accumulate(sum, emb.row(i));
    double sq = 0.0;
    for (double v : sum) sq += v * v;
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0)) return;  // members cancel; keep the previous centroid
    for (std::size_t t = 0; t < d; ++t) centroids[j * d + t] = static_cast<float>(sum[t] / norm);
  });
}

double sum_distances(const std::vector<float>& distance) {
  double total = 0.0;
  for (float v : distance) total += v;
  return total;
}

void require_unit_rows(std::span<const float> rows, std::size_t count, std::size_t d,
                       const char* what) {
  for (std::size_t j = 0; j < count; ++j) {
    double sq = 0.0;
    for (std::size_t t = 0; t < d; ++t) sq += static_cast<double>(rows[j * d + t]) * rows[j * d + t];
    if (!(std::abs(std::sqrt(sq) - 1.0) <= kUnitNormTolerance)) {
      throw ValidationError(std::string(what) + " " + std::to_string(j) + " is not unit-norm");
    }
  }
}

}  // namespace

void KmeansConfig::validate(std::size_t n) const {
  if (k == 0) throw ValidationError("k must be positive");
  if (k > n) {
    throw ValidationError("k (" + std::to_string(k) + ") exceeds the number of points (" +
                          std::to_string(n) + ")");
  }
  if (iters == 0) throw ValidationError("iters must be positive");
  if (min_points_per_centroid > 1 || max_points_per_centroid < n) {
    throw ValidationError("cluster balancing is not supported; use min_points_per_centroid <= 1 "
                          "and an unbounded max_points_per_centroid");
  }
}

std::vector<std::size_t> Clustering::cluster_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto c : assignment) ++sizes[c];
  return sizes;
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

void Clustering::validate() const {
  if (k == 0 || dim == 0) throw ValidationError("clustering has no centroids");
  if (centroids.size() != k * dim) throw ValidationError("centroid matrix shape mismatch");
  if (distance.size() != assignment.size()) throw ValidationError("distance/assignment length mismatch");
  for (auto c : assignment) {
    if (c >= k) throw ValidationError("cluster index " + std::to_string(c) + " out of range");
  }
  require_unit_rows(centroids, k, dim, "centroid");
}

void Clustering::validate(const EmbeddingMatrix& emb) const {
  validate();
  if (emb.n() != n()) {
    throw ValidationError("clustering covers " + std::to_string(n()) + " points but embeddings have " +
                          std::to_string(emb.n()));
  }
  if (emb.dim() != dim) throw ValidationError("clustering dimension does not match embeddings");
  for (std::size_t i = 0; i < n(); ++i) {
    const double expect = 1.0 - static_cast<double>(simd::dot(emb.row(i), centroid(assignment[i])));
    if (std::abs(expect - distance[i]) > 1e-5) {
      throw ValidationError("stored distance of row " + std::to_string(i) +
                            " disagrees with its centroid");
    }
  }
}

std::size_t default_k(std::size_t n) {
  if (n == 0) throw ValidationError("default_k needs at least one point");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n)))));
}

Assignment assign(const EmbeddingMatrix& emb, std::span<const float> centroids, std::size_t k) {
  if (k == 0) throw ValidationError("assign needs at least one centroid");
  if (centroids.size() != k * emb.dim()) {
    throw ValidationError("centroid dimension does not match embeddings (" +
                          std::to_string(centroids.size()) + " values for k=" + std::to_string(k) +
                          ", d=" + std::to_string(emb.dim()) + ")");
  }
  require_unit_rows(centroids, k, emb.dim(), "centroid");
  return assign_unchecked(emb, centroids, k);
}

double objective(const EmbeddingMatrix& emb, const Clustering& clustering) {
  if (clustering.n() != emb.n()) throw ValidationError("clustering does not match embeddings");
  return sum_distances(clustering.distance);
}

Clustering kmeans_spherical_from(const EmbeddingMatrix& emb, std::vector<float> initial_centroids,
                                 const KmeansConfig& cfg) {
  cfg.validate(emb.n());
  if (!emb.normalized()) throw ValidationError("k-means needs normalized embeddings");
  emb.require_normalized();
  if (initial_centroids.size() != cfg.k * emb.dim()) {
    throw ValidationError("initial centroids do not match k x dim");
  }
  require_unit_rows(initial_centroids, cfg.k, emb.dim(), "initial centroid");

  Clustering c;
  c.k = cfg.k;
  c.dim = emb.dim();
  c.seed = cfg.seed;
  c.centroids = std::move(initial_centroids);

  Assignment current = assign_unchecked(emb, c.centroids, c.k);
  repair_empty_clusters(emb, c.centroids, c.k, current);
  c.objective_history.push_back(sum_distances(current.distance));

  for (std::size_t it = 1; it <= cfg.iters; ++it) {
    update_centroids(emb, current.cluster, c.k, c.centroids);
    Assignment next = assign_unchecked(emb, c.centroids, c.k);
    repair_empty_clusters(emb, c.centroids, c.k, next);
    c.objective_history.push_back(sum_distances(next.distance));
    c.iters_run = it;
    const bool unchanged = next.cluster == current.cluster;
    current = std::move(next);
    if (unchanged) break;
  }

  c.assignment = std::move(current.cluster);
  c.distance = std::move(current.distance);
  return c;
}

Clustering kmeans_spherical(const EmbeddingMatrix& emb, const KmeansConfig& cfg) {
  cfg.validate(emb.n());
  Rng rng(cfg.seed);
  const auto picks = sample_indices(emb.n(), cfg.k, rng);
  std::vector<float> init;
  init.reserve(cfg.k * emb.dim());
  for (std::size_t r : picks) {
    const auto x = emb.row(r);
    init.insert(init.end(), x.begin(), x.end());
  }
  return kmeans_spherical_from(emb, std::move(init), cfg);
}

Clustering restrict_clustering(const Clustering& c, std::span<const std::size_t> rows) {
  Clustering out;
  out.k = c.k;
  out.dim = c.dim;
  out.centroids = c.centroids;
  out.iters_run = c.iters_run;
  out.seed = c.seed;
  out.assignment.reserve(rows.size());
  out.distance.reserve(rows.size());
  for (std::size_t r : rows) {
    out.assignment.push_back(c.assignment.at(r));
    out.distance.push_back(c.distance.at(r));
  }
  return out;
}

std::vector<std::uint8_t> encode_clustering(const Clustering& c) {
  binary::Writer w;
  w.bytes("D4KM");
  w.u32(kClusteringVersion);
  w.u32(static_cast<std::uint32_t>(c.k));
  w.u32(static_cast<std::uint32_t>(c.dim));
  w.u64(c.n());
  for (float x : c.centroids) w.f32(x);
  for (auto a : c.assignment) w.u32(a);
  for (float x : c.distance) w.f32(x);
  return w.buffer();
}

Clustering decode_clustering(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes);
  r.expect_magic("D4KM");
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kClusteringVersion) {
    throw FormatError(version_at, "unsupported clustering file version " + std::to_string(version));
  }
  Clustering c;
  c.k = r.u32();
  c.dim = r.u32();
  const std::uint64_t n = r.u64();
  if (c.k == 0 || c.dim == 0) throw FormatError(8, "clustering has zero k or dimension");
  r.require(static_cast<std::uint64_t>(c.k) * c.dim * 4, "centroids");
  c.centroids.resize(c.k * c.dim);
  for (auto& x : c.centroids) x = r.f32();
  if (n > (~std::uint64_t{0}) / 8) throw FormatError(16, "point count overflows");
  r.require(n * 8, "assignment and distances");
  c.assignment.resize(n);
  for (auto& a : c.assignment) {
    const std::uint64_t at = r.offset();
    a = r.u32();
    if (a >= c.k) throw FormatError(at, "cluster index " + std::to_string(a) + " out of range");
  }
  c.distance.resize(n);
  for (auto& x : c.distance) x = r.f32();
  r.expect_end();
  return c;
}

void write_clustering(const Clustering& c, const std::filesystem::path& path) {
  binary::write_file(path, encode_clustering(c));
}

Clustering read_clustering(const std::filesystem::path& path) {
  return decode_clustering(binary::read_file(path));
}

}  // namespace d4
