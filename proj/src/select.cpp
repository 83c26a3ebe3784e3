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

#include "d4/select.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <numeric>
#include <sstream>

#include "d4/error.hpp"
#include "d4/parallel.hpp"
#include "d4/random.hpp"
#include "d4/simd.hpp"

namespace d4 {

using nlohmann::json;

namespace {

void require_ratio(double r, const char* name) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in (0, 1], got " + std::to_string(r));
  }
}

SelectionResult base_result(Method m, double r, std::span<const std::string> ids) {
  SelectionResult out;
  out.method = m;
  out.r_target = r;
  out.n_source = ids.size();
  out.source_fingerprint = fingerprint_ids(ids);
  return out;
}

void keep(SelectionResult& out, std::span<const std::string> ids, std::size_t row, double score) {
  out.kept_rows.push_back(row);
  out.kept_ids.push_back(ids[row]);
  out.score.push_back(score);
}

void require_clustering(const EmbeddingMatrix& emb, const Clustering& c) {
  if (!emb.normalized()) throw ValidationError("selection needs normalized embeddings");
  if (c.n() != emb.n()) {
    throw ValidationError("clustering covers " + std::to_string(c.n()) + " points but embeddings have " +
                          std::to_string(emb.n()));
  }
  if (c.dim != emb.dim()) throw ValidationError("clustering dimension does not match embeddings");
  c.validate();
}

struct Edge {
  std::size_t a;
  std::size_t b;
  double sim;
};

double similarity(const EmbeddingMatrix& emb, std::size_t a, std::size_t b) {
  return std::clamp(static_cast<double>(simd::dot(emb.row(a), emb.row(b))), -1.0, 1.0);
}

/// Maximum spanning tree of one cluster's complete similarity graph (Prim).
/// For any threshold t, the components of {edges with sim > t} equal those
/// of the full threshold graph, so the tree answers every ε at once.
std::vector<Edge> max_spanning_tree(const EmbeddingMatrix& emb, const std::vector<std::size_t>& rows) {
  const std::size_t m = rows.size();
  std::vector<Edge> edges;
  if (m < 2) return edges;
  edges.reserve(m - 1);
  std::vector<char> in_tree(m, 0);
  std::vector<double> best(m, -2.0);
  std::vector<std::size_t> parent(m, 0);
  in_tree[0] = 1;
  for (std::size_t v = 1; v < m; ++v) best[v] = similarity(emb, rows[0], rows[v]);
  for (std::size_t step = 1; step < m; ++step) {
    std::size_t pick = m;
    for (std::size_t v = 0; v < m; ++v) {
      if (!in_tree[v] && (pick == m || best[v] > best[pick])) pick = v;
    }
    in_tree[pick] = 1;
    edges.push_back({rows[parent[pick]], rows[pick], best[pick]});
    for (std::size_t u = 0; u < m; ++u) {
      if (in_tree[u]) continue;
      const double s = similarity(emb, rows[pick], rows[u]);
      if (s > best[u]) {
        best[u] = s;
        parent[u] = pick;
      }
    }
  }
  return edges;
}

std::vector<Edge> spanning_forest(const EmbeddingMatrix& emb, const Clustering& c) {
  const auto members = c.members();
  std::vector<std::vector<Edge>> per_cluster(c.k);
  parallel_for(c.k, [&](std::size_t j) { per_cluster[j] = max_spanning_tree(emb, members[j]); });
  std::vector<Edge> all;
  for (auto& e : per_cluster) all.insert(all.end(), e.begin(), e.end());
  return all;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

/// Groups rows joined by forest edges with sim > 1 − ε and keeps one per group.
SelectionResult collapse_groups(const EmbeddingMatrix& emb, const Clustering& c,
                                const std::vector<Edge>& forest, double epsilon, KeepRule rule) {
  const std::size_t n = emb.n();
  const double threshold = 1.0 - epsilon;
  UnionFind uf(n);
  for (const auto& e : forest) {
    if (e.sim > threshold) uf.unite(e.a, e.b);
  }

  const auto better = [&](std::size_t cand, std::size_t cur) {
    const float dc = c.distance[cand];
    const float du = c.distance[cur];
    if (dc != du) return rule == KeepRule::farthest_from_centroid ? dc > du : dc < du;
    return emb.id(cand) < emb.id(cur);
  };
  std::vector<std::size_t> keeper(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (keeper[r] == n || better(i, keeper[r])) keeper[r] = i;
  }

  SelectionResult out = base_result(Method::semdedup, 1.0, emb.ids());
  out.epsilon_used = epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    if (keeper[uf.find(i)] == i) keep(out, emb.ids(), i, c.distance[i]);
  }
  return out;
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::random: return "random";
    case Method::semdedup: return "semdedup";
    case Method::prototypes: return "prototypes";
    case Method::d4: return "d4";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::random, Method::semdedup, Method::prototypes, Method::d4}) {
    if (method_name(m) == name) return m;
  }
  throw ValidationError("unknown selection method \"" + std::string(name) + "\"");
}

std::uint64_t fingerprint_ids(std::span<const std::string> ids) noexcept {
  std::uint64_t acc = splitmix64(ids.size());
  for (const auto& id : ids) acc += hash64(id, 0x1d5f1e9a2b3c4d5eULL);
  return acc;
}

std::size_t target_count(std::size_t n, double r) {
  return static_cast<std::size_t>(std::llround(r * static_cast<double>(n)));
}

SelectionResult select_random(std::span<const std::string> ids, double r, std::uint64_t seed) {
  require_ratio(r, "R");
  SelectionResult out = base_result(Method::random, r, ids);
  Rng rng(seed);
  for (std::size_t row : sample_indices(ids.size(), target_count(ids.size(), r), rng)) {
    keep(out, ids, row, 0.0);
  }
  return out;
}

SelectionResult semdedup_at_epsilon(const EmbeddingMatrix& emb, const Clustering& clustering,
                                    double epsilon, KeepRule keep_rule) {
  require_clustering(emb, clustering);
  if (!(epsilon >= 0.0 && epsilon <= 2.0)) throw ValidationError("epsilon must lie in [0, 2]");
  return collapse_groups(emb, clustering, spanning_forest(emb, clustering), epsilon, keep_rule);
}

SelectionResult semdedup(const EmbeddingMatrix& emb, const Clustering& clustering, double r_dedup,
                         const SemDedupOptions& options) {
  require_ratio(r_dedup, "R_dedup");
  require_clustering(emb, clustering);
  const std::size_t n = emb.n();
  const std::vector<Edge> forest = spanning_forest(emb, clustering);

  // Kept count at ε is n minus the number of forest edges with sim > 1 − ε.
  std::vector<double> ascending(forest.size());
  std::transform(forest.begin(), forest.end(), ascending.begin(), [](const Edge& e) { return e.sim; });
  std::sort(ascending.begin(), ascending.end());
  const auto kept_at = [&](double eps) -> std::size_t {
    const auto above = ascending.end() - std::upper_bound(ascending.begin(), ascending.end(), 1.0 - eps);
    return n - static_cast<std::size_t>(above);
  };

  const std::size_t target = target_count(n, r_dedup);
  std::size_t chosen;
  const std::size_t at_zero = kept_at(0.0);
  const std::size_t at_two = kept_at(2.0);
  if (at_zero <= target) {
    chosen = at_zero;
  } else if (at_two >= target) {
    chosen = at_two;
  } else {
    double lo = 0.0, hi = 2.0;
    std::size_t kept_lo = at_zero, kept_hi = at_two;
    bool hit = false;
    chosen = kept_hi;
    for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const std::size_t kept_mid = kept_at(mid);
      if (kept_mid > kept_lo || kept_mid < kept_hi) {
        throw Error("semdedup kept count is not monotone in epsilon");
      }
      if (kept_mid == target) {
        chosen = kept_mid;
        hit = true;
        break;
      }
      if (kept_mid > target) {
        lo = mid;
        kept_lo = kept_mid;
      } else {
        hi = mid;
        kept_hi = kept_mid;
      }
    }
    if (!hit) chosen = (kept_lo - target < target - kept_hi) ? kept_lo : kept_hi;
  }

  // Centre ε inside the interval producing `chosen`.
  double epsilon = 0.0;
  const std::size_t merges = n - chosen;
  if (merges > 0) {
    const std::size_t e = ascending.size();
    const double sim_last = ascending[e - merges];  // weakest merged edge
    const double eps_lo = 1.0 - sim_last;           // exclusive
    const double eps_hi = merges < e ? 1.0 - ascending[e - merges - 1] : 2.0;
    epsilon = std::clamp(0.5 * (eps_lo + std::min(eps_hi, 2.0)), 0.0, 2.0);
  }

  SelectionResult out = collapse_groups(emb, clustering, forest, epsilon, options.keep_rule);
  if (out.kept_rows.size() != chosen) throw Error("semdedup grouping disagrees with its ratio search");
  out.r_target = r_dedup;
  out.params["R_dedup"] = r_dedup;
  out.params["tolerance"] = options.tolerance;
  out.params["keep_farthest"] = options.keep_rule == KeepRule::farthest_from_centroid ? 1.0 : 0.0;
  if (std::abs(out.r_achieved() - r_dedup) > options.tolerance) {
    std::ostringstream msg;
    msg << "R_dedup=" << r_dedup << " not reachable within " << options.tolerance
        << "; closest achieved fraction " << out.r_achieved();
    out.warning = msg.str();
  }
  return out;
}

SelectionResult ssl_prototypes(const EmbeddingMatrix& emb, const Clustering& clustering,
                               double r_proto) {
  require_ratio(r_proto, "R_proto");
  require_clustering(emb, clustering);
  const std::size_t n = emb.n();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (clustering.distance[a] != clustering.distance[b]) {
      return clustering.distance[a] < clustering.distance[b];
    }
    return emb.id(a) < emb.id(b);
  });
  const std::size_t discard = target_count(n, 1.0 - r_proto);
  std::vector<char> dropped(n, 0);
  for (std::size_t i = 0; i < discard; ++i) dropped[order[i]] = 1;

  SelectionResult out = base_result(Method::prototypes, r_proto, emb.ids());
  out.params["R_proto"] = r_proto;
  for (std::size_t i = 0; i < n; ++i) {
    if (!dropped[i]) keep(out, emb.ids(), i, clustering.distance[i]);
  }
  return out;
}

void D4Config::validate() const {
  require_ratio(r_dedup, "R_dedup");
  require_ratio(r_proto, "R_proto");
  if (kmeans.iters == 0) throw ValidationError("iters must be positive");
  if (initial_k && *initial_k == 0) throw ValidationError("k must be positive");
  if (recluster_k && *recluster_k == 0) throw ValidationError("re-clustering k must be positive");
}

D4Result d4(const EmbeddingMatrix& emb, const Clustering& initial, const D4Config& cfg) {
  cfg.validate();
  SelectionResult dedup = semdedup(emb, initial, cfg.r_dedup, cfg.semdedup);

  D4Result out;
  out.dedup_rows = dedup.kept_rows;
  const EmbeddingMatrix survivors = emb.subset(out.dedup_rows);
  if (cfg.recluster) {
    KmeansConfig kc = cfg.kmeans;
    kc.k = cfg.recluster_k.value_or(default_k(survivors.n()));
    kc.seed = stage_seed(cfg.kmeans.seed, "recluster");
    out.stage2_clustering = kmeans_spherical(survivors, kc);
  } else {
    out.stage2_clustering = restrict_clustering(initial, out.dedup_rows);
  }
  SelectionResult proto = ssl_prototypes(survivors, out.stage2_clustering, cfg.r_proto);

  // Report the prototypes stage in source positions.
  SelectionResult proto_src = base_result(Method::prototypes, cfg.r_proto, emb.ids());
  proto_src.params = proto.params;
  proto_src.n_source = proto.n_source;
  proto_src.source_fingerprint = proto.source_fingerprint;
  for (std::size_t i = 0; i < proto.kept_rows.size(); ++i) {
    keep(proto_src, emb.ids(), out.dedup_rows[proto.kept_rows[i]], proto.score[i]);
  }

  SelectionResult& sel = out.selection;
  sel = base_result(Method::d4, cfg.r_dedup * cfg.r_proto, emb.ids());
  sel.params = {{"R_dedup", cfg.r_dedup},
                {"R_proto", cfg.r_proto},
                {"recluster", cfg.recluster ? 1.0 : 0.0},
                {"k_initial", static_cast<double>(initial.k)},
                {"k_stage2", static_cast<double>(out.stage2_clustering.k)}};
  sel.kept_rows = proto_src.kept_rows;
  sel.kept_ids = proto_src.kept_ids;
  sel.score = proto_src.score;
  sel.epsilon_used = dedup.epsilon_used;
  if (std::abs(sel.r_achieved() - sel.r_target) > 0.01) {
    std::ostringstream msg;
    msg << "overall ratio " << sel.r_achieved() << " misses R=" << sel.r_target << " by more than 0.01";
    sel.warning = msg.str();
  } else if (dedup.warning) {
    sel.warning = dedup.warning;
  }
  sel.stages.push_back(std::move(dedup));
  sel.stages.push_back(std::move(proto_src));
  return out;
}

D4Result d4(const EmbeddingMatrix& emb, const D4Config& cfg) {
  cfg.validate();
  KmeansConfig kc = cfg.kmeans;
  kc.k = cfg.initial_k.value_or(default_k(emb.n()));
  return d4(emb, kmeans_spherical(emb, kc), cfg);
}

void write_selection_records(const SelectionResult& r, std::ostream& out, std::string_view stage) {
  for (std::size_t i = 0; i < r.kept_ids.size(); ++i) {
    json rec = {{"id", r.kept_ids[i]}, {"score", r.score[i]}};
    if (!stage.empty()) rec["stage"] = stage;
    rec["kept"] = true;
    out << rec.dump() << '\n';
  }
}

namespace {

json summary_json(const SelectionResult& r) {
  json s = {{"method", method_name(r.method)},
            {"params", r.params},
            {"R_target", r.r_target},
            {"R_achieved", r.r_achieved()},
            {"n_source", r.n_source},
            {"n_kept", r.kept_ids.size()}};
  if (r.epsilon_used) s["epsilon_used"] = *r.epsilon_used;
  std::ostringstream fp;
  fp << std::hex << r.source_fingerprint;
  s["source_fingerprint"] = fp.str();
  if (r.warning) s["warning"] = *r.warning;
  if (!r.stages.empty()) {
    s["stages"] = json::array();
    for (const auto& st : r.stages) s["stages"].push_back(summary_json(st));
  }
  return s;
}

}  // namespace

std::string selection_summary(const SelectionResult& r) { return summary_json(r).dump(); }

SelectionResult read_selection(const std::filesystem::path& records,
                               const std::filesystem::path& summary) {
  std::ifstream sin(summary);
  if (!sin) throw IoError("cannot open " + summary.string());
  json s;
  try {
    s = json::parse(sin);
  } catch (const json::parse_error& e) {
    throw ParseError(1, summary.string() + ": " + e.what());
  }

  SelectionResult out;
  try {
    out.method = parse_method(s.at("method").get<std::string>());
    out.r_target = s.at("R_target").get<double>();
    out.n_source = s.at("n_source").get<std::size_t>();
    out.source_fingerprint = std::stoull(s.at("source_fingerprint").get<std::string>(), nullptr, 16);
    if (s.contains("epsilon_used")) out.epsilon_used = s["epsilon_used"].get<double>();
    if (s.contains("params")) out.params = s["params"].get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw ParseError(1, summary.string() + ": " + e.what());
  }

  std::ifstream rin(records);
  if (!rin) throw IoError("cannot open " + records.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(rin, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      out.kept_ids.push_back(rec.at("id").get<std::string>());
      out.score.push_back(rec.value("score", 0.0));
    } catch (const json::exception& e) {
      throw ParseError(lineno, records.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace d4
