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
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "d4/corpus.hpp"

namespace d4 {

/// MinHash-LSH parameters. Defaults are 20 hashes in 20 bands of one row,
/// so two documents are duplicate candidates iff any signature position
/// matches.
struct LshConfig {
  std::size_t num_hashes = 20;
  std::size_t bands = 20;
  std::size_t rows_per_band = 1;
  std::size_t shingle_width = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MinHashSignature {
  std::vector<std::uint64_t> values;
  std::size_t shingle_width = 0;

  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

using ShingleSet = std::set<std::string>;

/// Contiguous word w-grams joined by single spaces. A text with fewer than w
/// words yields a single shingle holding all of its words.
ShingleSet shingles(std::string_view text, std::size_t w);

/// values[i] = min over shingles of hash_i(shingle), hash_i seeded by
/// (cfg.seed, i). Throws ValidationError on an empty set.
MinHashSignature signature(const ShingleSet& sh, const LshConfig& cfg);
MinHashSignature text_signature(std::string_view text, const LshConfig& cfg);

/// Fraction of positions where the two signatures agree.
double signature_similarity(const MinHashSignature& a, const MinHashSignature& b);

struct DuplicateGroup {
  std::size_t group_id = 0;
  std::vector<std::string> member_ids;  // corpus order
  std::string kept_id;
};

struct DedupResult {
  std::vector<std::size_t> kept_rows;  // corpus order
  std::vector<std::string> kept_ids;
  std::vector<DuplicateGroup> groups;  // only groups with >= 2 members
};

/// Unions documents sharing any band bucket and keeps the lexicographically
/// lowest id of each group. Group ids follow the corpus position of each
/// group's first member.
DedupResult lsh_dedup(std::span<const std::string> ids,
                      std::span<const MinHashSignature> signatures, const LshConfig& cfg);
DedupResult lsh_dedup(const DocumentSet& docs, const LshConfig& cfg);

}  // namespace d4
