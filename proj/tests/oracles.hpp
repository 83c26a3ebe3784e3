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

// Independent reference implementations used by the tests. They share no code
// with the library beyond the data types: plain double loops, exhaustive
// search, and full sorts.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "d4/cluster.hpp"
#include "d4/embed.hpp"

namespace oracle {

inline double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

inline std::vector<double> normalized_mean(const d4::EmbeddingMatrix& emb,
                                           const std::vector<std::size_t>& rows) {
  std::vector<double> m(emb.dim(), 0.0);
  for (auto r : rows) {
    for (std::size_t j = 0; j < emb.dim(); ++j) m[j] += emb.row(r)[j];
  }
  double norm = 0.0;
  for (double v : m) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : m) v /= norm;
  return m;
}

struct Argmax {
  std::vector<std::size_t> cluster;
  std::vector<double> distance;
};

/// Exhaustive nearest centroid; the first maximum wins.
inline Argmax assign(const d4::EmbeddingMatrix& emb, const std::vector<float>& centroids,
                     std::size_t k) {
  Argmax out;
  const std::size_t d = emb.dim();
  for (std::size_t i = 0; i < emb.n(); ++i) {
    std::size_t best = 0;
    double best_sim = -1e300;
    for (std::size_t j = 0; j < k; ++j) {
      const double s = dot(emb.row(i), std::span<const float>(centroids.data() + j * d, d));
      if (s > best_sim) {
        best_sim = s;
        best = j;
      }
    }
    out.cluster.push_back(best);
    out.distance.push_back(1.0 - best_sim);
  }
  return out;
}

struct Partition {
  double objective = 0.0;
  std::vector<std::size_t> side;  // 0 or 1 per point
  std::vector<float> centroids;   // 2 × dim
};

/// Best split of all points into two non-empty parts under the
/// sum-of-cosine-distance-to-renormalized-mean objective.
inline Partition best_two_partition(const d4::EmbeddingMatrix& emb) {
  const std::size_t n = emb.n();
  Partition best;
  best.objective = 1e300;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    if (mask & 1u) continue;  // each split once: point 0 always on side 0
    std::vector<std::size_t> parts[2];
    for (std::size_t i = 0; i < n; ++i) parts[(mask >> i) & 1u].push_back(i);
    double obj = 0.0;
    std::vector<double> means[2];
    for (int p = 0; p < 2; ++p) {
      means[p] = normalized_mean(emb, parts[p]);
      for (auto r : parts[p]) {
        double s = 0.0;
        for (std::size_t j = 0; j < emb.dim(); ++j) s += emb.row(r)[j] * means[p][j];
        obj += 1.0 - s;
      }
    }
    if (obj < best.objective) {
      best.objective = obj;
      best.side.assign(n, 0);
      for (auto r : parts[1]) best.side[r] = 1;
      best.centroids.clear();
      for (int p = 0; p < 2; ++p) {
        for (double v : means[p]) best.centroids.push_back(static_cast<float>(v));
      }
    }
  }
  return best;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

/// All-pairs SemDeDup: within each cluster, points with similarity above
/// 1 - epsilon are joined; each component keeps the member farthest from the
/// centroid (or closest), ties to the lowest id. Returns the kept ids.
inline std::set<std::string> semdedup(const d4::EmbeddingMatrix& emb, const d4::Clustering& c,
                                      double epsilon, bool keep_farthest = true) {
  UnionFind uf(emb.n());
  for (std::size_t i = 0; i < emb.n(); ++i) {
    for (std::size_t j = i + 1; j < emb.n(); ++j) {
      if (c.assignment[i] != c.assignment[j]) continue;
      if (dot(emb.row(i), emb.row(j)) > 1.0 - epsilon) uf.unite(i, j);
    }
  }
  std::map<std::size_t, std::size_t> best;  // root -> chosen row
  for (std::size_t i = 0; i < emb.n(); ++i) {
    const std::size_t r = uf.find(i);
    auto it = best.find(r);
    if (it == best.end()) {
      best[r] = i;
      continue;
    }
    const std::size_t cur = it->second;
    const double di = c.distance[i];
    const double dc = c.distance[cur];
    const bool better = keep_farthest ? di > dc : di < dc;
    if (better || (di == dc && emb.id(i) < emb.id(cur))) it->second = i;
  }
  std::set<std::string> kept;
  for (const auto& [root, row] : best) kept.insert(emb.id(row));
  return kept;
}

/// Global prototypicality pruning by full sort on (distance, id).
inline std::set<std::string> prototypes(const d4::EmbeddingMatrix& emb, const d4::Clustering& c,
                                        double r) {
  std::vector<std::size_t> order(emb.n());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (c.distance[a] != c.distance[b]) return c.distance[a] < c.distance[b];
    return emb.id(a) < emb.id(b);
  });
  const auto drop = static_cast<std::size_t>(std::llround((1.0 - r) * static_cast<double>(emb.n())));
  std::set<std::string> kept;
  for (std::size_t i = drop; i < order.size(); ++i) kept.insert(emb.id(order[i]));
  return kept;
}

struct Nearest {
  std::string train_id;
  double distance;
};

/// Exhaustive nearest training point; ties to the lowest id.
inline std::vector<Nearest> nearest(const d4::EmbeddingMatrix& valid, const d4::EmbeddingMatrix& train) {
  std::vector<Nearest> out;
  for (std::size_t i = 0; i < valid.n(); ++i) {
    std::size_t best = 0;
    double best_sim = -1e300;
    for (std::size_t j = 0; j < train.n(); ++j) {
      const double s = dot(valid.row(i), train.row(j));
      if (s > best_sim || (s == best_sim && train.id(j) < train.id(best))) {
        best_sim = s;
        best = j;
      }
    }
    out.push_back({train.id(best), 1.0 - best_sim});
  }
  return out;
}

/// Mean over unordered pairs of non-empty clusters of smaller / larger.
inline double balance(const std::vector<std::size_t>& sizes) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    for (std::size_t j = i + 1; j < sizes.size(); ++j) {
      if (sizes[i] == 0 || sizes[j] == 0) continue;
      sum += static_cast<double>(std::min(sizes[i], sizes[j])) / static_cast<double>(std::max(sizes[i], sizes[j]));
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

}  // namespace oracle
