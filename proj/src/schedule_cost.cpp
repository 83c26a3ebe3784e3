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

#include "d4/schedule_cost.hpp"

#include <cmath>

#include "d4/error.hpp"
#include "d4/random.hpp"

namespace d4 {

double epochs_for(std::uint64_t t_total, std::uint64_t t_selected) {
  if (t_selected == 0) throw ValidationError("selected subset has no tokens");
  return static_cast<double>(t_total) / static_cast<double>(t_selected);
}

EpochPlan plan_epochs(const DocumentSet& selected, std::uint64_t t_total, std::uint64_t seed,
                      bool reshuffle_each_epoch) {
  if (selected.empty()) throw ValidationError("cannot schedule an empty selection");
  if (selected.total_tokens() == 0) throw ValidationError("selected subset has no tokens");
  if (t_total == 0) throw ValidationError("token budget must be positive");

  EpochPlan plan;
  plan.t_total = t_total;
  plan.t_selected = selected.total_tokens();
  plan.epochs = epochs_for(t_total, plan.t_selected);
  plan.reshuffle_seed = seed;
  plan.reshuffle = reshuffle_each_epoch;

  const std::size_t n = selected.size();
  for (std::uint64_t epoch = 0; plan.order_tokens < t_total; ++epoch) {
    std::vector<std::size_t> perm;
    if (reshuffle_each_epoch) {
      Rng rng(seed + epoch);
      perm = random_permutation(n, rng);
    } else {
      perm.resize(n);
      for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    }
    for (std::size_t i = 0; i < n && plan.order_tokens < t_total; ++i) {
      const Document& d = selected[perm[i]];
      plan.order.push_back(d.id);
      plan.order_tokens += d.token_count;
    }
  }
  return plan;
}

void CostModel::validate() const {
  const auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(name) + " must be a finite nonnegative number");
    }
  };
  nonneg(baseline_train_gpu_hours, "baseline GPU hours");
  nonneg(fraction_updates_saved, "fraction of updates saved");
  nonneg(embed_gpu_hours, "embedding GPU hours");
  nonneg(cpu_stage_gpu_hour_equivalent, "CPU-stage GPU-hour equivalent");
  if (!(fraction_updates_saved < 1.0)) throw ValidationError("fraction of updates saved must be < 1");
}

double naive_gain(const CostModel& model) {
  model.validate();
  return model.baseline_train_gpu_hours * model.fraction_updates_saved;
}

double overall_gain(const CostModel& model) {
  return naive_gain(model) - model.embed_gpu_hours - model.cpu_stage_gpu_hour_equivalent;
}

double embed_cost(double tokens_to_embed, double tokens_per_gpu_hour) {
  if (!(tokens_per_gpu_hour > 0.0)) throw ValidationError("tokens per GPU hour must be positive");
  if (!(tokens_to_embed >= 0.0)) throw ValidationError("token count must be nonnegative");
  return tokens_to_embed / tokens_per_gpu_hour;
}

}  // namespace d4
