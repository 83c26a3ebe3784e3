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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "d4/corpus.hpp"

namespace d4 {

/// Tolerance on |‖row‖₂ − 1| for rows flagged as normalized.
inline constexpr double kUnitNormTolerance = 1e-5;

/// n×d row-major float matrix whose rows are aligned with unique document
/// ids. All selection methods operate on normalized matrices, where cosine
/// distance is 1 − dot.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  /// Validates shape, id uniqueness and, when normalized, row norms.
  EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids, std::vector<float> data,
                  bool normalized);

  std::size_t n() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<float>& data() const noexcept { return data_; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }

  /// Rows at the given positions, in that order.
  EmbeddingMatrix subset(std::span<const std::size_t> rows) const;

  /// Throws ValidationError unless every row is unit-norm within tolerance.
  void require_normalized() const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  bool normalized_ = false;
};

/// L2-normalizes v in place. A zero vector becomes the basis vector e_0.
void normalize_or_sentinel(std::span<float> v);

/// Maps a text to a dense vector of fixed dimension.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<float> embed(std::string_view text) const = 0;
};

/// Signed feature hashing of whitespace word unigrams and bigrams into d
/// buckets, then L2 normalization. Bucket = h mod d, sign = top bit of h.
/// Empty text (or features that cancel exactly) maps to e_0.
std::vector<float> feature_hash_embed(std::string_view text, std::size_t d, std::uint64_t seed);

/// Hash used for a unigram feature; a bigram "a b" uses bigram_feature_hash.
std::uint64_t unigram_feature_hash(std::string_view token, std::uint64_t seed) noexcept;
std::uint64_t bigram_feature_hash(std::string_view first, std::string_view second,
                                  std::uint64_t seed) noexcept;

class FeatureHashEmbedder final : public Embedder {
 public:
  FeatureHashEmbedder(std::size_t d, std::uint64_t seed);
  std::size_t dim() const override { return d_; }
  std::vector<float> embed(std::string_view text) const override;

 private:
  std::size_t d_;
  std::uint64_t seed_;
};

/// Splits a document into consecutive chunk_size-token chunks, embeds each
/// with the base embedder, and returns the renormalized mean.
std::shared_ptr<const Embedder> chunk_average(std::shared_ptr<const Embedder> base,
                                              std::size_t chunk_size);

struct EmbedderSpec {
  enum class Kind { feature_hash, external };

  Kind kind = Kind::feature_hash;
  std::size_t dimension = 256;
  std::uint64_t seed = 0;
  std::optional<std::size_t> chunk_size;
  /// Precomputed embedding file, required for Kind::external.
  std::filesystem::path external_path;

  void validate() const;
};

/// Builds the in-process embedder for a feature_hash spec.
std::shared_ptr<const Embedder> make_embedder(const EmbedderSpec& spec);

/// Embeds texts in parallel. Output rows follow input order and are always
/// normalized.
EmbeddingMatrix embed_texts(std::vector<std::string> ids, std::span<const std::string_view> texts,
                            const Embedder& embedder);

/// One normalized row per document, in corpus order. For external specs the
/// rows are looked up by id in spec.external_path; missing ids are an error
/// that lists them.
EmbeddingMatrix embed_corpus(const DocumentSet& docs, const EmbedderSpec& spec);

/// Rows of source for the given ids, in that order, renormalized. Missing
/// ids raise ValidationError listing them (origin names the source).
EmbeddingMatrix lookup_embeddings(std::span<const std::string> ids, const EmbeddingMatrix& source,
                                  const std::string& origin);

/// Binary format, little-endian:
///   "D4EM" | version u32 = 1 | count u64 | dim u32 | flags u32 (bit0 normalized)
///   | count×dim f32 row-major | count × (u16 length + UTF-8 id bytes)
std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& m);
EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes);
void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

}  // namespace d4
