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
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "d4/cluster.hpp"
#include "d4/embed.hpp"
#include "d4/select.hpp"

namespace d4 {

/// Mean over unordered pairs of non-empty clusters of smaller/larger size.
/// Throws ValidationError with fewer than two (non-empty) clusters.
double cluster_balance(std::span<const std::size_t> sizes);
double cluster_balance(const Clustering& clustering);

struct FlaggedCluster {
  std::size_t cluster = 0;
  double std_distance = 0.0;  // population standard deviation
  double mean_distance = 0.0;
  std::size_t size = 0;
};

inline constexpr double kDuplicateStdThreshold = 0.03;

/// Clusters with at least two members whose distance-to-centroid standard
/// deviation is below the threshold, sorted by ascending std.
std::vector<FlaggedCluster> find_duplicate_driven_clusters(const EmbeddingMatrix& emb,
                                                           const Clustering& clustering,
                                                           double std_threshold = kDuplicateStdThreshold);

/// Fraction of non-empty clusters that are flagged.
double duplicate_driven_fraction(const EmbeddingMatrix& emb, const Clustering& clustering,
                                 double std_threshold = kDuplicateStdThreshold);

struct EcdfPoint {
  double value = 0.0;
  double cumulative = 0.0;
};

/// Per-cluster mean member distance, sorted, paired with i/k over the k
/// non-empty clusters. The last cumulative value is exactly 1.
std::vector<EcdfPoint> ecdf_mean_distance(const EmbeddingMatrix& emb, const Clustering& clustering);

/// Step-function value of an ECDF at x (fraction of points with value <= x).
double ecdf_at(std::span<const EcdfPoint> ecdf, double x);

struct DiagnosticsReport {
  double cluster_balance = 1.0;
  std::vector<FlaggedCluster> duplicate_driven_clusters;
  std::vector<EcdfPoint> ecdf;
  std::vector<std::string> notes;
};

DiagnosticsReport diagnose(const EmbeddingMatrix& emb, const Clustering& clustering,
                           double std_threshold = kDuplicateStdThreshold);

struct OverlapMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> cells;  // percent of the smaller set
};

/// cell(i, j) = 100 |K_i ∩ K_j| / min(|K_i|, |K_j|); the diagonal is 100.
/// Results must share n_source and source_fingerprint.
OverlapMatrix selection_overlap(std::span<const SelectionResult> results,
                                std::span<const std::string> labels = {});

struct NnMatch {
  std::string valid_id;
  std::string train_id;
  double distance = 0.0;
};

struct NnSummary {
  std::string group;
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
};

struct NnReport {
  std::vector<NnMatch> matches;
  /// "all" first, then one entry per validation group label, sorted.
  std::vector<NnSummary> summary;
};

/// Exact brute-force nearest training row for every validation row by
/// cosine distance; ties go to the lowest train id. Optional group labels
/// (validation id -> set name) add per-set summaries.
NnReport nn_to_train(const EmbeddingMatrix& valid, const EmbeddingMatrix& train,
                     const std::map<std::string, std::string>& groups = {});

struct ScoreBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  std::optional<double> mean_distance;
  std::optional<double> mean_before;
  std::optional<double> mean_delta;  // after − before
};

/// Equal-width bins over [min distance, max distance] of the report.
std::vector<ScoreBin> binned_score_analysis(const NnReport& nn,
                                            const std::map<std::string, double>& score_before,
                                            const std::map<std::string, double>& score_after,
                                            std::size_t n_bins = 20);

/// Human-readable summary table.
void print_report(const DiagnosticsReport& report, std::ostream& out);
void print_overlap(const OverlapMatrix& m, std::ostream& out);

}  // namespace d4
