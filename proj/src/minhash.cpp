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

#include "d4/minhash.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "d4/error.hpp"
#include "d4/parallel.hpp"
#include "d4/random.hpp"

namespace d4 {

void LshConfig::validate() const {
  if (num_hashes == 0) throw ValidationError("num_hashes must be positive");
  if (bands == 0 || rows_per_band == 0) throw ValidationError("bands and rows_per_band must be positive");
  if (bands * rows_per_band != num_hashes) {
    throw ValidationError("bands (" + std::to_string(bands) + ") x rows_per_band (" +
                          std::to_string(rows_per_band) + ") must equal num_hashes (" +
                          std::to_string(num_hashes) + ")");
  }
  if (shingle_width == 0) throw ValidationError("shingle width must be >= 1");
}

ShingleSet shingles(std::string_view text, std::size_t w) {
  if (w == 0) throw ValidationError("shingle width must be >= 1");
  const auto words = split_whitespace(text);
  const auto join = [&](std::size_t begin, std::size_t end) {
    std::string s;
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) s += ' ';
      s.append(words[i]);
    }
    return s;
  };
  ShingleSet out;
  if (words.size() < w) {
    out.insert(join(0, words.size()));
    return out;
  }
  for (std::size_t i = 0; i + w <= words.size(); ++i) out.insert(join(i, i + w));
  return out;
}

MinHashSignature signature(const ShingleSet& sh, const LshConfig& cfg) {
  cfg.validate();
  if (sh.empty()) throw ValidationError("cannot sign an empty shingle set");
  std::vector<std::uint64_t> salts(cfg.num_hashes);
  for (std::size_t i = 0; i < cfg.num_hashes; ++i) salts[i] = splitmix64(cfg.seed + splitmix64(i + 1));

  MinHashSignature sig{std::vector<std::uint64_t>(cfg.num_hashes,
                                                  std::numeric_limits<std::uint64_t>::max()),
                       cfg.shingle_width};
  for (const auto& s : sh) {
    const std::uint64_t base = hash64(s, cfg.seed);
    for (std::size_t i = 0; i < cfg.num_hashes; ++i) {
      sig.values[i] = std::min(sig.values[i], splitmix64(base ^ salts[i]));
    }
  }
  return sig;
}

MinHashSignature text_signature(std::string_view text, const LshConfig& cfg) {
  return signature(shingles(text, cfg.shingle_width), cfg);
}

double signature_similarity(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.values.size() != b.values.size() || a.values.empty()) {
    throw ValidationError("signatures differ in length");
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) same += a.values[i] == b.values[i];
  return static_cast<double>(same) / static_cast<double>(a.values.size());
}

namespace {

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
  // Root is always the smaller index, so the structure is merge-order free.
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

}  // namespace

DedupResult lsh_dedup(std::span<const std::string> ids,
                      std::span<const MinHashSignature> signatures, const LshConfig& cfg) {
  cfg.validate();
  if (ids.size() != signatures.size()) throw ValidationError("ids and signatures differ in length");
  const std::size_t n = ids.size();
  for (const auto& s : signatures) {
    if (s.values.size() != cfg.num_hashes) throw ValidationError("signature length does not match config");
  }

  UnionFind uf(n);
  for (std::size_t band = 0; band < cfg.bands; ++band) {
    // Key is the band's raw signature bytes, so buckets collide only on
    // exact equality.
    std::unordered_map<std::string, std::size_t> buckets;
    buckets.reserve(n);
    std::string key(cfg.rows_per_band * 8, '\0');
    for (std::size_t doc = 0; doc < n; ++doc) {
      for (std::size_t r = 0; r < cfg.rows_per_band; ++r) {
        const std::uint64_t v = signatures[doc].values[band * cfg.rows_per_band + r];
        for (int b = 0; b < 8; ++b) key[r * 8 + b] = static_cast<char>(v >> (8 * b));
      }
      const auto [it, inserted] = buckets.try_emplace(key, doc);
      if (!inserted) uf.unite(it->second, doc);
    }
  }

  std::vector<std::size_t> root(n);
  std::vector<std::size_t> size(n, 0);
  std::vector<std::size_t> keeper(n);
  for (std::size_t i = 0; i < n; ++i) {
    root[i] = uf.find(i);
    if (size[root[i]]++ == 0 || ids[i] < ids[keeper[root[i]]]) keeper[root[i]] = i;
  }

  DedupResult out;
  std::unordered_map<std::size_t, std::size_t> group_of_root;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = root[i];
    if (keeper[r] == i) {
      out.kept_rows.push_back(i);
      out.kept_ids.push_back(ids[i]);
    }
    if (size[r] < 2) continue;
    auto [it, fresh] = group_of_root.try_emplace(r, out.groups.size());
    if (fresh) out.groups.push_back({out.groups.size(), {}, ids[keeper[r]]});
    out.groups[it->second].member_ids.push_back(ids[i]);
  }
  return out;
}

DedupResult lsh_dedup(const DocumentSet& docs, const LshConfig& cfg) {
  cfg.validate();
  std::vector<MinHashSignature> sigs(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { sigs[i] = text_signature(docs[i].text, cfg); });
  const auto ids = docs.ids();
  return lsh_dedup(ids, sigs, cfg);
}

}  // namespace d4
