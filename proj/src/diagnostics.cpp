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

#include "d4/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "d4/error.hpp"
#include "d4/parallel.hpp"
#include "d4/simd.hpp"

namespace d4 {

double cluster_balance(std::span<const std::size_t> sizes) {
  std::vector<double> s;
  for (std::size_t v : sizes) {
    if (v > 0) s.push_back(static_cast<double>(v));
  }
  if (sizes.size() < 2) throw ValidationError("cluster balance needs k >= 2");
  if (s.size() < 2) throw ValidationError("cluster balance needs at least two non-empty clusters");
  std::sort(s.begin(), s.end());
  // Pair (i, j) with i < j contributes s_i / s_j since s is ascending.
  double total = 0.0;
  double prefix = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    total += prefix / s[j];
    prefix += s[j];
  }
  const double pairs = static_cast<double>(s.size()) * static_cast<double>(s.size() - 1) / 2.0;
  return total / pairs;
}

double cluster_balance(const Clustering& clustering) {
  const auto sizes = clustering.cluster_sizes();
  return cluster_balance(sizes);
}

namespace {

struct Moments {
  std::size_t size = 0;
  double mean = 0.0;
  double std_dev = 0.0;
};

std::vector<Moments> cluster_moments(const EmbeddingMatrix& emb, const Clustering& c) {
  if (c.n() != emb.n()) throw ValidationError("clustering does not match embeddings");
  const auto members = c.members();
  std::vector<Moments> out(c.k);
  for (std::size_t j = 0; j < c.k; ++j) {
    const auto& m = members[j];
    if (m.empty()) continue;
    double sum = 0.0;
    for (auto i : m) sum += c.distance[i];
    const double mean = sum / static_cast<double>(m.size());
    double sq = 0.0;
    for (auto i : m) sq += (c.distance[i] - mean) * (c.distance[i] - mean);
    out[j] = {m.size(), mean, std::sqrt(sq / static_cast<double>(m.size()))};
  }
  return out;
}

}  // namespace

std::vector<FlaggedCluster> find_duplicate_driven_clusters(const EmbeddingMatrix& emb,
                                                           const Clustering& clustering,
                                                           double std_threshold) {
  const auto moments = cluster_moments(emb, clustering);
  std::vector<FlaggedCluster> out;
  for (std::size_t j = 0; j < moments.size(); ++j) {
    const auto& m = moments[j];
    if (m.size >= 2 && m.std_dev < std_threshold) out.push_back({j, m.std_dev, m.mean, m.size});
  }
  std::stable_sort(out.begin(), out.end(), [](const FlaggedCluster& a, const FlaggedCluster& b) {
    return a.std_distance < b.std_distance;
  });
  return out;
}

double duplicate_driven_fraction(const EmbeddingMatrix& emb, const Clustering& clustering,
                                 double std_threshold) {
  const auto sizes = clustering.cluster_sizes();
  const auto nonempty = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
  if (nonempty == 0) return 0.0;
  return static_cast<double>(find_duplicate_driven_clusters(emb, clustering, std_threshold).size()) /
         static_cast<double>(nonempty);
}

std::vector<EcdfPoint> ecdf_mean_distance(const EmbeddingMatrix& emb, const Clustering& clustering) {
  std::vector<double> means;
  for (const auto& m : cluster_moments(emb, clustering)) {
    if (m.size > 0) means.push_back(m.mean);
  }
  std::sort(means.begin(), means.end());
  std::vector<EcdfPoint> out;
  out.reserve(means.size());
  const double k = static_cast<double>(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    out.push_back({means[i], static_cast<double>(i + 1) / k});
  }
  return out;
}

double ecdf_at(std::span<const EcdfPoint> ecdf, double x) {
  double f = 0.0;
  for (const auto& p : ecdf) {
    if (p.value <= x) f = p.cumulative;
  }
  return f;
}

DiagnosticsReport diagnose(const EmbeddingMatrix& emb, const Clustering& clustering,
                           double std_threshold) {
  DiagnosticsReport r;
  const auto sizes = clustering.cluster_sizes();
  const auto nonempty = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
  if (nonempty >= 2) {
    r.cluster_balance = cluster_balance(sizes);
  } else {
    r.notes.push_back("cluster balance undefined with fewer than two non-empty clusters; reported as 1");
  }
  r.duplicate_driven_clusters = find_duplicate_driven_clusters(emb, clustering, std_threshold);
  r.ecdf = ecdf_mean_distance(emb, clustering);
  if (static_cast<std::size_t>(nonempty) < clustering.k) {
    r.notes.push_back(std::to_string(clustering.k - nonempty) + " empty clusters excluded");
  }
  if (r.cluster_balance < 0.5) r.notes.push_back("cluster balance below 0.5");
  return r;
}

OverlapMatrix selection_overlap(std::span<const SelectionResult> results,
                                std::span<const std::string> labels) {
  if (!labels.empty() && labels.size() != results.size()) {
    throw ValidationError("one label per selection is required");
  }
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].n_source != results[0].n_source ||
        results[i].source_fingerprint != results[0].source_fingerprint) {
      throw ValidationError("selections " + std::to_string(0) + " and " + std::to_string(i) +
                            " were drawn from different source sets");
    }
  }
  const std::size_t m = results.size();
  std::vector<std::vector<std::string>> sets(m);
  for (std::size_t i = 0; i < m; ++i) {
    sets[i] = results[i].kept_ids;
    std::sort(sets[i].begin(), sets[i].end());
  }

  OverlapMatrix out;
  out.cells.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    out.labels.push_back(labels.empty() ? std::string(method_name(results[i].method)) : labels[i]);
    out.cells[i][i] = 100.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      std::size_t common = 0;
      auto a = sets[i].begin(), b = sets[j].begin();
      while (a != sets[i].end() && b != sets[j].end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++common;
          ++a;
          ++b;
        }
      }
      const std::size_t smaller = std::min(sets[i].size(), sets[j].size());
      const double pct = smaller == 0 ? 0.0 : 100.0 * static_cast<double>(common) / static_cast<double>(smaller);
      out.cells[i][j] = pct;
      out.cells[j][i] = pct;
    }
  }
  return out;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

NnSummary summarize(std::string group, const std::vector<double>& d) {
  NnSummary s{std::move(group), d.size(), 0.0, median_of(d)};
  for (double v : d) s.mean += v;
  if (!d.empty()) s.mean /= static_cast<double>(d.size());
  return s;
}

}  // namespace

NnReport nn_to_train(const EmbeddingMatrix& valid, const EmbeddingMatrix& train,
                     const std::map<std::string, std::string>& groups) {
  if (valid.dim() != train.dim()) {
    throw ValidationError("validation dimension " + std::to_string(valid.dim()) +
                          " does not match train dimension " + std::to_string(train.dim()));
  }
  if (!valid.normalized() || !train.normalized()) {
    throw ValidationError("nearest-neighbour search needs normalized embeddings");
  }
  if (train.n() == 0) throw ValidationError("training set is empty");

  NnReport report;
  report.matches.resize(valid.n());
  parallel_for(valid.n(), [&](std::size_t v) {
    const auto x = valid.row(v);
    std::size_t best = 0;
    float best_dot = simd::dot(x, train.row(0));
    for (std::size_t t = 1; t < train.n(); ++t) {
      const float s = simd::dot(x, train.row(t));
      if (s > best_dot || (s == best_dot && train.id(t) < train.id(best))) {
        best_dot = s;
        best = t;
      }
    }
    report.matches[v] = {valid.id(v), train.id(best),
                         std::clamp(1.0 - static_cast<double>(best_dot), 0.0, 2.0)};
  });

  std::vector<double> all;
  std::map<std::string, std::vector<double>> by_group;
  for (const auto& m : report.matches) {
    all.push_back(m.distance);
    if (const auto it = groups.find(m.valid_id); it != groups.end()) {
      by_group[it->second].push_back(m.distance);
    }
  }
  report.summary.push_back(summarize("all", all));
  for (const auto& [g, d] : by_group) report.summary.push_back(summarize(g, d));
  return report;
}

std::vector<ScoreBin> binned_score_analysis(const NnReport& nn,
                                            const std::map<std::string, double>& score_before,
                                            const std::map<std::string, double>& score_after,
                                            std::size_t n_bins) {
  if (n_bins == 0) throw ValidationError("n_bins must be >= 1");
  for (const auto& m : nn.matches) {
    if (!score_before.contains(m.valid_id)) {
      throw ValidationError("no before-selection score for validation id \"" + m.valid_id + "\"");
    }
    if (!score_after.contains(m.valid_id)) {
      throw ValidationError("no after-selection score for validation id \"" + m.valid_id + "\"");
    }
  }

  double lo = 0.0, hi = 0.0;
  if (!nn.matches.empty()) {
    const auto [mn, mx] = std::minmax_element(nn.matches.begin(), nn.matches.end(),
                                              [](const NnMatch& a, const NnMatch& b) {
                                                return a.distance < b.distance;
                                              });
    lo = mn->distance;
    hi = mx->distance;
  }
  const double width = (hi - lo) / static_cast<double>(n_bins);

  std::vector<ScoreBin> bins(n_bins);
  std::vector<double> sum_d(n_bins, 0.0), sum_b(n_bins, 0.0), sum_delta(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lower = lo + width * static_cast<double>(b);
    bins[b].upper = b + 1 == n_bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (const auto& m : nn.matches) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = std::min(n_bins - 1, static_cast<std::size_t>((m.distance - lo) / width));
    }
    const double before = score_before.at(m.valid_id);
    const double after = score_after.at(m.valid_id);
    ++bins[b].count;
    sum_d[b] += m.distance;
    sum_b[b] += before;
    sum_delta[b] += after - before;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bins[b].count == 0) continue;
    const double c = static_cast<double>(bins[b].count);
    bins[b].mean_distance = sum_d[b] / c;
    bins[b].mean_before = sum_b[b] / c;
    bins[b].mean_delta = sum_delta[b] / c;
  }
  return bins;
}

void print_report(const DiagnosticsReport& report, std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof line, "cluster balance            %.4f\n", report.cluster_balance);
  out << line;
  std::snprintf(line, sizeof line, "duplicate-driven clusters  %zu\n",
                report.duplicate_driven_clusters.size());
  out << line;
  if (!report.duplicate_driven_clusters.empty()) {
    out << "  cluster      size   mean_dist    std_dist\n";
    for (const auto& f : report.duplicate_driven_clusters) {
      std::snprintf(line, sizeof line, "  %7zu  %8zu  %10.6f  %10.6f\n", f.cluster, f.size,
                    f.mean_distance, f.std_distance);
      out << line;
    }
  }
  std::snprintf(line, sizeof line, "clusters in ECDF           %zu\n", report.ecdf.size());
  out << line;
  for (const auto& n : report.notes) out << "note: " << n << '\n';
}

void print_overlap(const OverlapMatrix& m, std::ostream& out) {
  char cell[64];
  out << std::string(12, ' ');
  for (const auto& l : m.labels) {
    std::snprintf(cell, sizeof cell, "%12.12s", l.c_str());
    out << cell;
  }
  out << '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    std::snprintf(cell, sizeof cell, "%-12.12s", m.labels[i].c_str());
    out << cell;
    for (double v : m.cells[i]) {
      std::snprintf(cell, sizeof cell, "%12.2f", v);
      out << cell;
    }
    out << '\n';
  }
}

}  // namespace d4
