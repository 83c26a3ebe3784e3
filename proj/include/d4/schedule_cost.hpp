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
#include <string>
#include <vector>

#include "d4/corpus.hpp"

namespace d4 {

/// Repetition schedule for training on a fixed selected subset.
struct EpochPlan {
  std::uint64_t t_total = 0;
  std::uint64_t t_selected = 0;
  double epochs = 0.0;  // t_total / t_selected
  std::vector<std::string> order;
  std::uint64_t order_tokens = 0;
  std::uint64_t reshuffle_seed = 0;
  bool reshuffle = false;
};

/// t_total / t_selected. Throws ValidationError when t_selected is zero.
double epochs_for(std::uint64_t t_total, std::uint64_t t_selected);

/// Repeats the selected documents (source order, or a permutation seeded by
/// seed + epoch index when reshuffling) until the running token count first
/// reaches t_total. Overshoot is below one document.
EpochPlan plan_epochs(const DocumentSet& selected, std::uint64_t t_total, std::uint64_t seed,
                      bool reshuffle_each_epoch);

/// GPU-hour accounting for a selection run.
struct CostModel {
  double baseline_train_gpu_hours = 0.0;
  double fraction_updates_saved = 0.0;  // [0, 1)
  double embed_gpu_hours = 0.0;
  /// CPU preprocessing expressed in GPU hours; 0 treats it as negligible.
  double cpu_stage_gpu_hour_equivalent = 0.0;

  void validate() const;
};

/// baseline × fraction saved.
double naive_gain(const CostModel& model);
/// naive gain − embedding cost − CPU-stage cost. Negative means selection
/// costs more than it saves; never clamped.
double overall_gain(const CostModel& model);
/// tokens / throughput.
double embed_cost(double tokens_to_embed, double tokens_per_gpu_hour);

}  // namespace d4
