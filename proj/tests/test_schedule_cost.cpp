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

#include <map>

#include "d4/corpus.hpp"
#include "d4/error.hpp"
#include "d4/random.hpp"
#include "d4/schedule_cost.hpp"
#include "support.hpp"

using namespace d4;

namespace {

DocumentSet docs_with_tokens(const std::vector<std::uint64_t>& tokens) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    docs.push_back({fixture::id(i), "", tokens[i], {}});
  }
  return DocumentSet(std::move(docs));
}

}  // namespace

TEST_CASE("epochs") {
  CHECK(epochs_for(40'000'000'000ULL, 20'000'000'000ULL) == 2.0);
  CHECK(epochs_for(10, 4) == 2.5);
  CHECK_THROWS_AS(epochs_for(10, 0), ValidationError);
}

TEST_CASE("plan covers whole epochs in order and stops at the budget") {
  const DocumentSet d = docs_with_tokens({3, 5, 2});
  const EpochPlan p = plan_epochs(d, 21, 0, false);
  CHECK(p.t_selected == 10);
  CHECK(p.epochs == 2.1);
  CHECK(p.order.size() == 7);
  CHECK(p.order_tokens == 23);
  for (std::size_t i = 0; i < p.order.size(); ++i) CHECK(p.order[i] == fixture::id(i % 3));
}

TEST_CASE("plan invariants on random instances") {
  Rng rng(99);
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::uint64_t> tokens(1 + rng.below(20));
    for (auto& x : tokens) x = 1 + rng.below(50);
    const DocumentSet d = docs_with_tokens(tokens);
    const std::uint64_t budget = 1 + rng.below(5 * d.total_tokens());
    const bool reshuffle = rng.bernoulli(0.5);
    const EpochPlan p = plan_epochs(d, budget, rng.next(), reshuffle);

    std::map<std::string, std::uint64_t> tok;
    for (const auto& doc : d) tok[doc.id] = doc.token_count;
    std::uint64_t sum = 0;
    for (const auto& id : p.order) sum += tok.at(id);
    CHECK(sum == p.order_tokens);
    // Stopping rule: the budget is reached, and not before the last document.
    CHECK(p.order_tokens >= budget);
    CHECK(p.order_tokens - tok.at(p.order.back()) < budget);
    // Coverage: each full epoch holds every document exactly once.
    const std::size_t n = d.size();
    for (std::size_t e = 0; (e + 1) * n <= p.order.size(); ++e) {
      std::set<std::string> seen(p.order.begin() + e * n, p.order.begin() + (e + 1) * n);
      CHECK(seen.size() == n);
    }
    std::set<std::string> tail(p.order.begin() + (p.order.size() / n) * n, p.order.end());
    CHECK(tail.size() == p.order.size() % n);
    CHECK(p.epochs == static_cast<double>(budget) / static_cast<double>(d.total_tokens()));
  }
}

TEST_CASE("reshuffled plans are deterministic under seed") {
  const DocumentSet d = docs_with_tokens(std::vector<std::uint64_t>(50, 1));
  const EpochPlan a = plan_epochs(d, 200, 7, true);
  const EpochPlan b = plan_epochs(d, 200, 7, true);
  const EpochPlan c = plan_epochs(d, 200, 8, true);
  CHECK(a.order == b.order);
  CHECK(a.order != c.order);
  CHECK(std::vector<std::string>(a.order.begin(), a.order.begin() + 50) !=
        std::vector<std::string>(a.order.begin() + 50, a.order.begin() + 100));
}

TEST_CASE("plan input checks") {
  CHECK_THROWS_AS(plan_epochs(DocumentSet{}, 10, 0, false), ValidationError);
  CHECK_THROWS_AS(plan_epochs(docs_with_tokens({0, 0}), 10, 0, false), ValidationError);
  CHECK_THROWS_AS(plan_epochs(docs_with_tokens({1}), 0, 0, false), ValidationError);
}

TEST_CASE("cost identities") {
  CostModel m;
  m.baseline_train_gpu_hours = 21500;
  m.fraction_updates_saved = 0.20;
  m.embed_gpu_hours = 888;
  CHECK(naive_gain(m) == 4300.0);
  CHECK(overall_gain(m) == 3412.0);
  m.cpu_stage_gpu_hour_equivalent = 12;
  CHECK(overall_gain(m) == 3400.0);
  CHECK(embed_cost(1000.0, 250.0) == 4.0);
  m.embed_gpu_hours = 5000;
  CHECK(overall_gain(m) < 0.0);
}

TEST_CASE("cost input checks") {
  CostModel m;
  m.baseline_train_gpu_hours = -1;
  CHECK_THROWS_AS(naive_gain(m), ValidationError);
  m = CostModel{};
  m.fraction_updates_saved = 1.0;
  CHECK_THROWS_AS(naive_gain(m), ValidationError);
  CHECK_THROWS_AS(embed_cost(10, 0), ValidationError);
}
