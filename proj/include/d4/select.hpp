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
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "d4/cluster.hpp"
#include "d4/embed.hpp"

namespace d4 {

enum class Method { random, semdedup, prototypes, d4 };

std::string_view method_name(Method m) noexcept;
/// Throws ValidationError for an unknown name.
Method parse_method(std::string_view name);

/// Output of a selection strategy over a source of n_source documents.
///
/// score holds one value per kept document:
///   random     - 0
///   semdedup   - cosine distance to the cluster centroid
///   prototypes - cosine distance to the nearest centroid (the ranking key)
///   d4         - prototypes distance under the final (re)clustering
struct SelectionResult {
  Method method = Method::random;
  std::map<std::string, double> params;
  double r_target = 1.0;
  std::size_t n_source = 0;
  std::uint64_t source_fingerprint = 0;
  std::vector<std::size_t> kept_rows;  // ascending source positions
  std::vector<std::string> kept_ids;
  std::vector<double> score;
  std::optional<double> epsilon_used;
  /// Set when the requested ratio could not be met within tolerance.
  std::optional<std::string> warning;
  /// d4 only: the semdedup and prototypes stages, rows in source positions.
  std::vector<SelectionResult> stages;

  double r_achieved() const noexcept {
    return n_source == 0 ? 0.0 : static_cast<double>(kept_rows.size()) / static_cast<double>(n_source);
  }
};

/// Order-independent fingerprint of a set of ids; equal sets give equal values.
std::uint64_t fingerprint_ids(std::span<const std::string> ids) noexcept;

/// round(r * n).
std::size_t target_count(std::size_t n, double r);

/// Uniform sample of round(r * n) ids without replacement, kept in source order.
SelectionResult select_random(std::span<const std::string> ids, double r, std::uint64_t seed);

enum class KeepRule {
  farthest_from_centroid,  // default; keeps the least prototypical member
  closest_to_centroid,     // sensitivity check
};

struct SemDedupOptions {
  double tolerance = 0.005;
  KeepRule keep_rule = KeepRule::farthest_from_centroid;
};

/// Within each cluster, links members whose cosine similarity exceeds 1 − ε,
/// takes connected components as duplicate groups, and keeps one member per
/// group (the keep rule; ties to the lowest id). ε is bisected over [0, 2]
/// until the kept fraction is within tolerance of r_dedup; when the kept
/// fraction jumps over the target, the closest achievable count wins and
/// ties go to the smaller kept set. The reported ε is the midpoint of the
/// ε-interval that produces the achieved count (0 when nothing is merged).
SelectionResult semdedup(const EmbeddingMatrix& emb, const Clustering& clustering, double r_dedup,
                         const SemDedupOptions& options = {});

/// The same grouping at a fixed ε, without any ratio search.
SelectionResult semdedup_at_epsilon(const EmbeddingMatrix& emb, const Clustering& clustering,
                                    double epsilon, KeepRule keep_rule = KeepRule::farthest_from_centroid);

/// Ranks every point globally by distance to its centroid and discards the
/// round((1 − r) * n) smallest (most prototypical); ties discard the lowest
/// id first.
SelectionResult ssl_prototypes(const EmbeddingMatrix& emb, const Clustering& clustering,
                               double r_proto);

struct D4Config {
  double r_dedup = 0.75;
  double r_proto = 1.0;
  bool recluster = true;
  /// Iterations and seed for both clusterings. k is not read from here.
  KmeansConfig kmeans;
  /// Cluster count for the initial clustering; default_k(n) when empty.
  std::optional<std::size_t> initial_k;
  /// Cluster count for re-clustering; default_k(|D'|) when empty.
  std::optional<std::size_t> recluster_k;
  SemDedupOptions semdedup;

  void validate() const;
};

struct D4Result {
  SelectionResult selection;
  /// Clustering used by the prototypes stage, over the semdedup survivors.
  Clustering stage2_clustering;
  /// Source rows of the semdedup survivors (rows of stage2_clustering).
  std::vector<std::size_t> dedup_rows;
};

/// SemDeDup at r_dedup over the given clustering, then (re)clustering of the
/// survivors, then SSL prototypes at r_proto. Overall ratio r_dedup * r_proto.
D4Result d4(const EmbeddingMatrix& emb, const Clustering& initial, const D4Config& cfg);
/// As above, fitting the initial clustering first.
D4Result d4(const EmbeddingMatrix& emb, const D4Config& cfg);

/// Newline-delimited records {id, score, stage?, kept: true}, one per kept id.
void write_selection_records(const SelectionResult& r, std::ostream& out,
                             std::string_view stage = {});
/// {method, R_target, R_achieved, epsilon_used?, n_source, n_kept, ...} as
/// one JSON object string.
std::string selection_summary(const SelectionResult& r);

/// Rebuilds a result (ids, scores and summary fields) from the two files
/// above. kept_rows is left empty.
SelectionResult read_selection(const std::filesystem::path& records,
                               const std::filesystem::path& summary);

}  // namespace d4
