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

#include <algorithm>
#include <set>
#include <sstream>

#include "d4/cluster.hpp"
#include "d4/corpus.hpp"
#include "d4/error.hpp"
#include "d4/parallel.hpp"
#include "d4/select.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace d4;

namespace {

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

Clustering fit(const EmbeddingMatrix& m, std::size_t k, std::uint64_t seed = 0) {
  KmeansConfig c;
  c.k = k;
  c.seed = seed;
  return kmeans_spherical(m, c);
}

// Hand-built clustering with the given distances and a single centroid.
Clustering with_distances(const std::vector<float>& dist, std::size_t dim) {
  Clustering c;
  c.k = 1;
  c.dim = dim;
  c.centroids.assign(dim, 0.0f);
  c.centroids[0] = 1.0f;
  c.assignment.assign(dist.size(), 0);
  c.distance = dist;
  return c;
}

struct Planted {
  DocumentSet docs;
  EmbeddingMatrix emb;
  Clustering clustering;
};

const Planted& planted() {
  static const Planted p = [] {
    Planted out;
    out.docs = synthesize_corpus(fixture::planted_spec());
    out.emb = embed_corpus(out.docs, EmbedderSpec{});
    out.clustering = fit(out.emb, default_k(out.emb.n()));
    return out;
  }();
  return p;
}

}  // namespace

TEST_CASE("method names") {
  for (auto m : {Method::random, Method::semdedup, Method::prototypes, Method::d4}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("kmeans"), ValidationError);
}

TEST_CASE("random selection keeps exactly round(R n)") {
  const auto ids = fixture::ids(1001);
  for (double r : {0.1, 0.25, 0.5, 1.0}) {
    const SelectionResult s = select_random(ids, r, 3);
    CHECK(s.kept_ids.size() == target_count(1001, r));
    CHECK(std::is_sorted(s.kept_rows.begin(), s.kept_rows.end()));
  }
  CHECK(as_set(select_random(ids, 0.5, 1).kept_ids) == as_set(select_random(ids, 0.5, 1).kept_ids));
  CHECK(as_set(select_random(ids, 0.5, 1).kept_ids) != as_set(select_random(ids, 0.5, 2).kept_ids));
  CHECK_THROWS_AS(select_random(ids, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(select_random(ids, 1.5, 1), ValidationError);
}

TEST_CASE("prototypes: definition examples") {
  const EmbeddingMatrix m = fixture::matrix({{1, 0}, {1, 0.1f}, {1, 0.2f}});
  const Clustering c = with_distances({0.2f, 0.1f, 0.3f}, 2);
  CHECK(ssl_prototypes(m, c, 1.0).kept_ids.size() == 3);
  const SelectionResult s = ssl_prototypes(m, c, 2.0 / 3.0);
  CHECK(s.kept_ids == std::vector<std::string>{fixture::id(0), fixture::id(2)});
  CHECK(s.score == std::vector<double>{0.2f, 0.3f});
  CHECK_THROWS_AS(ssl_prototypes(m, c, 0.0), ValidationError);
}

TEST_CASE("prototypes equal the full-sort oracle, ties included") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EmbeddingMatrix m = fixture::blobs(50, 6, 4, 0.5, seed);
    Clustering c = fit(m, 4, seed);
    if (seed % 3 == 0) {
      // Quantize distances to force ties.
      for (auto& d : c.distance) d = std::round(d * 10.0f) / 10.0f;
    }
    const double r = 0.1 + 0.009 * static_cast<double>(seed);
    CHECK(as_set(ssl_prototypes(m, c, r).kept_ids) == oracle::prototypes(m, c, r));
  }
}

TEST_CASE("semdedup: trivial ratios and identical points") {
  const EmbeddingMatrix m = fixture::blobs(40, 5, 3, 1.0, 1);
  const Clustering c = fit(m, 3);
  const SelectionResult all = semdedup(m, c, 1.0);
  CHECK(all.kept_ids.size() == 40);
  CHECK(*all.epsilon_used == 0.0);

  const EmbeddingMatrix same = fixture::matrix({{1, 2}, {1, 2}, {1, 2}, {1, 2}});
  const Clustering one = fit(same, 1);
  for (double eps : {1e-6, 0.1, 1.0}) {
    CHECK(semdedup_at_epsilon(same, one, eps).kept_ids.size() == 1);
  }
  CHECK(semdedup_at_epsilon(same, one, 0.0).kept_ids.size() == 4);
  CHECK(semdedup_at_epsilon(same, one, 0.5).kept_ids == std::vector<std::string>{fixture::id(0)});
}

TEST_CASE("semdedup_at_epsilon equals the all-pairs union-find oracle") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const EmbeddingMatrix m = fixture::blobs(80, 6, 3, 0.3, seed);
    const Clustering c = fit(m, 3, seed);
    for (double eps : {0.001, 0.01, 0.05, 0.2}) {
      CHECK(as_set(semdedup_at_epsilon(m, c, eps).kept_ids) == oracle::semdedup(m, c, eps));
      CHECK(as_set(semdedup_at_epsilon(m, c, eps, KeepRule::closest_to_centroid).kept_ids) ==
            oracle::semdedup(m, c, eps, false));
    }
  }
}

TEST_CASE("semdedup kept count is monotone in epsilon") {
  const EmbeddingMatrix m = fixture::blobs(150, 6, 4, 0.3, 2);
  const Clustering c = fit(m, 4);
  std::size_t prev = m.n();
  for (int i = 0; i <= 200; ++i) {
    const std::size_t kept = semdedup_at_epsilon(m, c, 0.01 * i).kept_ids.size();
    CHECK(kept <= prev);
    prev = kept;
  }
  CHECK(prev == 4 - std::count(c.cluster_sizes().begin(), c.cluster_sizes().end(), 0u));
}

TEST_CASE("semdedup hits the ratio and matches the oracle at its epsilon") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EmbeddingMatrix m = fixture::blobs(300, 8, 5, 0.4, seed);
    const Clustering c = fit(m, 6, seed);
    for (double r : {0.9, 0.75, 0.5}) {
      const SelectionResult s = semdedup(m, c, r);
      CHECK(std::abs(s.r_achieved() - r) <= 0.005);
      CHECK_FALSE(s.warning.has_value());
      CHECK(as_set(s.kept_ids) == oracle::semdedup(m, c, *s.epsilon_used));
    }
  }
}

TEST_CASE("unreachable semdedup ratios warn") {
  // Two clusters of four identical points: only 2 or 8 survivors exist.
  const EmbeddingMatrix m =
      fixture::matrix({{1, 0}, {1, 0}, {1, 0}, {1, 0}, {0, 1}, {0, 1}, {0, 1}, {0, 1}});
  const Clustering c = fit(m, 2);
  const SelectionResult s = semdedup(m, c, 0.5);
  CHECK(s.kept_ids.size() == 2);
  CHECK(s.warning.has_value());
}

TEST_CASE("planted corpus: one survivor per group, all singletons kept") {
  const Planted& p = planted();
  const SelectionResult s = semdedup(p.emb, p.clustering, 920.0 / 1000.0);
  CHECK(s.kept_ids.size() == 920);
  CHECK(as_set(s.kept_ids) == oracle::semdedup(p.emb, p.clustering, *s.epsilon_used));
  std::map<std::string, int> per_group;
  std::size_t topics = 0;
  const auto kept = as_set(s.kept_ids);
  for (const auto& d : p.docs) {
    if (!kept.contains(d.id)) continue;
    if (d.meta.at("kind") == "topic") {
      ++topics;
    } else {
      per_group[d.meta.at("group")]++;
    }
  }
  CHECK(topics == 900);
  CHECK(per_group.size() == 20);
  for (const auto& [g, n] : per_group) CHECK(n == 1);
}

TEST_CASE("semdedup and prototypes are permutation equivariant") {
  const EmbeddingMatrix m = fixture::blobs(120, 6, 4, 0.3, 8);
  const Clustering c = fit(m, 4);
  Rng rng(3);
  const auto perm = random_permutation(m.n(), rng);
  const EmbeddingMatrix pm = m.subset(perm);
  const Clustering pc = restrict_clustering(c, perm);
  CHECK(as_set(semdedup(m, c, 0.7).kept_ids) == as_set(semdedup(pm, pc, 0.7).kept_ids));
  CHECK(as_set(ssl_prototypes(m, c, 0.6).kept_ids) == as_set(ssl_prototypes(pm, pc, 0.6).kept_ids));
}

TEST_CASE("d4 composition") {
  const Planted& p = planted();
  D4Config identity;
  identity.r_dedup = 1.0;
  identity.r_proto = 1.0;
  CHECK(d4::d4(p.emb, p.clustering, identity).selection.kept_ids.size() == p.emb.n());

  D4Config cfg;
  cfg.r_proto = 1.0 / 3.0;
  const D4Result r = d4::d4(p.emb, p.clustering, cfg);
  CHECK(std::abs(r.selection.r_achieved() - 0.25) <= 0.01);
  CHECK(r.selection.r_target == doctest::Approx(0.25));
  REQUIRE(r.selection.stages.size() == 2);
  const auto dedup = as_set(r.selection.stages[0].kept_ids);
  for (const auto& id : r.selection.kept_ids) CHECK(dedup.contains(id));
  CHECK(r.stage2_clustering.k == default_k(dedup.size()));

  D4Config fixed = cfg;
  fixed.recluster = false;
  const D4Result nr = d4::d4(p.emb, p.clustering, fixed);
  CHECK(nr.stage2_clustering.k == p.clustering.k);
  CHECK(as_set(nr.selection.stages[0].kept_ids) == dedup);
}

TEST_CASE("d4 does not depend on thread count") {
  const Planted& p = planted();
  D4Config cfg;
  cfg.r_proto = 0.5;
  set_num_threads(1);
  const D4Result a = d4::d4(p.emb, cfg);
  set_num_threads(8);
  const D4Result b = d4::d4(p.emb, cfg);
  set_num_threads(1);
  CHECK(a.selection.kept_ids == b.selection.kept_ids);
  CHECK(a.selection.score == b.selection.score);
}

TEST_CASE("semdedup and prototypes overlap beyond chance") {
  const Planted& p = planted();
  const auto sd = as_set(semdedup(p.emb, p.clustering, 0.75).kept_ids);
  const auto pr = as_set(ssl_prototypes(p.emb, p.clustering, 0.75).kept_ids);
  std::size_t both = 0;
  for (const auto& id : sd) both += pr.contains(id);
  // Two independent random selections of these sizes share |A||B|/n.
  const double expected = static_cast<double>(sd.size()) * static_cast<double>(pr.size()) / 1000.0;
  CHECK(static_cast<double>(both) > expected);
}

TEST_CASE("selection files round trip") {
  const Planted& p = planted();
  D4Config cfg;
  cfg.r_proto = 0.5;
  const SelectionResult s = d4::d4(p.emb, p.clustering, cfg).selection;
  fixture::TempDir dir;
  {
    std::ofstream rec(dir / "sel.jsonl");
    write_selection_records(s, rec, "prototypes");
  }
  fixture::write_text(dir / "sum.json", selection_summary(s));
  const SelectionResult back = read_selection(dir / "sel.jsonl", dir / "sum.json");
  CHECK(back.method == Method::d4);
  CHECK(back.kept_ids == s.kept_ids);
  CHECK(back.n_source == s.n_source);
  CHECK(back.source_fingerprint == s.source_fingerprint);
  CHECK(back.r_target == doctest::Approx(s.r_target));

  const std::string first_line = fixture::read_text(dir / "sel.jsonl").substr(0, 200);
  CHECK(first_line.find("\"kept\":true") != std::string::npos);
  CHECK(first_line.find("\"stage\":\"prototypes\"") != std::string::npos);
}

TEST_CASE("selection input checks") {
  const EmbeddingMatrix m = fixture::blobs(20, 4, 2, 0.3, 1);
  const Clustering c = fit(m, 2);
  const EmbeddingMatrix other = fixture::blobs(21, 4, 2, 0.3, 1);
  CHECK_THROWS_AS(semdedup(other, c, 0.5), ValidationError);
  CHECK_THROWS_AS(semdedup_at_epsilon(m, c, 2.5), ValidationError);
  D4Config bad;
  bad.r_proto = 0.0;
  CHECK_THROWS_AS(d4::d4(m, c, bad), ValidationError);
}
