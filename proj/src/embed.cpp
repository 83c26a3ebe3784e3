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

#include "d4/embed.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "binary_io.hpp"
#include "d4/error.hpp"
#include "d4/parallel.hpp"
#include "d4/random.hpp"
#include "d4/simd.hpp"

namespace d4 {

namespace {

constexpr std::uint64_t kBigramSalt = 0xb16a4d5e3c2f1e0dULL;
constexpr std::uint32_t kEmbeddingVersion = 1;

double norm_of(std::span<const float> v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  return std::sqrt(sq);
}

/// Writes acc / ‖acc‖ into out, or e_0 when acc is zero.
void normalized_from_double(const std::vector<double>& acc, std::span<float> out) {
  double sq = 0.0;
  for (double x : acc) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    std::fill(out.begin(), out.end(), 0.f);
    out[0] = 1.f;
    return;
  }
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] / norm);
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids,
                                 std::vector<float> data, bool normalized)
    : dim_(dim), ids_(std::move(ids)), data_(std::move(data)), normalized_(normalized) {
  if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
  if (data_.size() != ids_.size() * dim_) {
    throw ValidationError("embedding payload has " + std::to_string(data_.size()) +
                          " values, expected " + std::to_string(ids_.size()) + "x" +
                          std::to_string(dim_));
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids_.size());
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw ValidationError("duplicate embedding id \"" + id + "\"");
  }
  if (normalized_) require_normalized();
}

EmbeddingMatrix EmbeddingMatrix::subset(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<float> data;
  ids.reserve(rows.size());
  data.reserve(rows.size() * dim_);
  for (std::size_t r : rows) {
    ids.push_back(ids_.at(r));
    const auto src = row(r);
    data.insert(data.end(), src.begin(), src.end());
  }
  EmbeddingMatrix out;
  out.dim_ = dim_;
  out.ids_ = std::move(ids);
  out.data_ = std::move(data);
  out.normalized_ = normalized_;
  return out;
}

void EmbeddingMatrix::require_normalized() const {
  for (std::size_t i = 0; i < n(); ++i) {
    const double norm = norm_of(row(i));
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
      throw ValidationError("row " + std::to_string(i) + " (id \"" + ids_[i] +
                            "\") has norm " + std::to_string(norm) + ", expected 1");
    }
  }
}

void normalize_or_sentinel(std::span<float> v) {
  if (v.empty()) return;
  const double norm = norm_of(v);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    std::fill(v.begin(), v.end(), 0.f);
    v[0] = 1.f;
    return;
  }
  simd::scale(v, static_cast<float>(1.0 / norm));
}

std::uint64_t unigram_feature_hash(std::string_view token, std::uint64_t seed) noexcept {
  return hash64(token, seed);
}

std::uint64_t bigram_feature_hash(std::string_view first, std::string_view second,
                                  std::uint64_t seed) noexcept {
  std::string joined;
  joined.reserve(first.size() + 1 + second.size());
  joined.append(first).append(1, ' ').append(second);
  return hash64(joined, seed ^ kBigramSalt);
}

std::vector<float> feature_hash_embed(std::string_view text, std::size_t d, std::uint64_t seed) {
  if (d < 2) throw ValidationError("embedding dimension must be >= 2");
  std::vector<double> acc(d, 0.0);
  const auto add = [&](std::uint64_t h) {
    acc[h % d] += (h >> 63) ? -1.0 : 1.0;
  };
  const auto tokens = split_whitespace(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(unigram_feature_hash(tokens[i], seed));
    if (i + 1 < tokens.size()) add(bigram_feature_hash(tokens[i], tokens[i + 1], seed));
  }
  std::vector<float> out(d);
  normalized_from_double(acc, out);
  return out;
}

FeatureHashEmbedder::FeatureHashEmbedder(std::size_t d, std::uint64_t seed) : d_(d), seed_(seed) {
  if (d < 2) throw ValidationError("embedding dimension must be >= 2");
}

std::vector<float> FeatureHashEmbedder::embed(std::string_view text) const {
  return feature_hash_embed(text, d_, seed_);
}

namespace {

class ChunkAverageEmbedder final : public Embedder {
 public:
  ChunkAverageEmbedder(std::shared_ptr<const Embedder> base, std::size_t chunk_size)
      : base_(std::move(base)), chunk_size_(chunk_size) {}

  std::size_t dim() const override { return base_->dim(); }

  std::vector<float> embed(std::string_view text) const override {
    const auto tokens = split_whitespace(text);
    if (tokens.size() <= chunk_size_) return base_->embed(text);

    std::vector<double> acc(dim(), 0.0);
    std::string chunk;
    for (std::size_t start = 0; start < tokens.size(); start += chunk_size_) {
      chunk.clear();
      const std::size_t end = std::min(tokens.size(), start + chunk_size_);
      for (std::size_t i = start; i < end; ++i) {
        if (i > start) chunk += ' ';
        chunk.append(tokens[i]);
      }
      const auto v = base_->embed(chunk);
      simd::accumulate(acc, v);
    }
    std::vector<float> out(dim());
    normalized_from_double(acc, out);
    return out;
  }

 private:
  std::shared_ptr<const Embedder> base_;
  std::size_t chunk_size_;
};

}  // namespace

std::shared_ptr<const Embedder> chunk_average(std::shared_ptr<const Embedder> base,
                                              std::size_t chunk_size) {
  if (!base) throw ValidationError("chunk_average needs a base embedder");
  if (chunk_size == 0) throw ValidationError("chunk_size must be >= 1");
  return std::make_shared<ChunkAverageEmbedder>(std::move(base), chunk_size);
}

void EmbedderSpec::validate() const {
  if (kind == Kind::feature_hash && dimension < 2) {
    throw ValidationError("embedding dimension must be >= 2");
  }
  if (chunk_size && *chunk_size == 0) throw ValidationError("chunk_size must be >= 1");
  if (kind == Kind::external) {
    if (external_path.empty()) throw ValidationError("external embedder needs an embedding file");
    if (chunk_size) throw ValidationError("chunk averaging does not apply to precomputed embeddings");
  }
}

std::shared_ptr<const Embedder> make_embedder(const EmbedderSpec& spec) {
  spec.validate();
  if (spec.kind != EmbedderSpec::Kind::feature_hash) {
    throw ValidationError("precomputed embeddings have no in-process embedder");
  }
  std::shared_ptr<const Embedder> e = std::make_shared<FeatureHashEmbedder>(spec.dimension, spec.seed);
  if (spec.chunk_size) e = chunk_average(std::move(e), *spec.chunk_size);
  return e;
}

EmbeddingMatrix embed_texts(std::vector<std::string> ids, std::span<const std::string_view> texts,
                            const Embedder& embedder) {
  if (ids.size() != texts.size()) throw ValidationError("ids and texts differ in length");
  const std::size_t d = embedder.dim();
  std::vector<float> data(texts.size() * d);
  parallel_for(texts.size(), [&](std::size_t i) {
    const auto v = embedder.embed(texts[i]);
    std::span<float> dst(data.data() + i * d, d);
    std::copy(v.begin(), v.end(), dst.begin());
    normalize_or_sentinel(dst);
  });
  return EmbeddingMatrix(d, std::move(ids), std::move(data), true);
}

EmbeddingMatrix embed_corpus(const DocumentSet& docs, const EmbedderSpec& spec) {
  spec.validate();
  if (spec.kind == EmbedderSpec::Kind::feature_hash) {
    std::vector<std::string_view> texts;
    texts.reserve(docs.size());
    for (const auto& d : docs) texts.push_back(d.text);
    return embed_texts(docs.ids(), texts, *make_embedder(spec));
  }

  const auto ids = docs.ids();
  return lookup_embeddings(ids, read_embeddings(spec.external_path), spec.external_path.string());
}

EmbeddingMatrix lookup_embeddings(std::span<const std::string> ids, const EmbeddingMatrix& source,
                                  const std::string& origin) {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(source.n());
  for (std::size_t i = 0; i < source.n(); ++i) index.emplace(source.id(i), i);

  std::vector<std::string> missing;
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) {
      missing.push_back(id);
    } else {
      rows.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " document ids missing from " + origin + ":";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " \"" + missing[i] + "\"";
    if (missing.size() > 20) msg += " ...";
    throw ValidationError(msg);
  }

  const std::size_t d = source.dim();
  std::vector<float> data(rows.size() * d);
  parallel_for(rows.size(), [&](std::size_t i) {
    const auto src = source.row(rows[i]);
    std::span<float> dst(data.data() + i * d, d);
    std::copy(src.begin(), src.end(), dst.begin());
    normalize_or_sentinel(dst);
  });
  return EmbeddingMatrix(d, std::vector<std::string>(ids.begin(), ids.end()), std::move(data), true);
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& m) {
  binary::Writer w;
  w.bytes("D4EM");
  w.u32(kEmbeddingVersion);
  w.u64(m.n());
  w.u32(static_cast<std::uint32_t>(m.dim()));
  w.u32(m.normalized() ? 1u : 0u);
  for (float x : m.data()) w.f32(x);
  for (const auto& id : m.ids()) {
    if (id.size() > 0xFFFF) throw ValidationError("id longer than 65535 bytes: " + id.substr(0, 32));
    w.u16(static_cast<std::uint16_t>(id.size()));
    w.bytes(id);
  }
  return w.buffer();
}

EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes);
  r.expect_magic("D4EM");
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kEmbeddingVersion) {
    throw FormatError(version_at, "unsupported embedding file version " + std::to_string(version));
  }
  const std::uint64_t count = r.u64();
  const std::uint64_t dim_at = r.offset();
  const std::uint32_t dim = r.u32();
  if (dim == 0) throw FormatError(dim_at, "embedding dimension is zero");
  const std::uint32_t flags = r.u32();

  // Guard the size computation before allocating.
  if (count > (~std::uint64_t{0}) / (4ULL * dim)) throw FormatError(8, "row count overflows");
  r.require(count * dim * 4, "embedding payload");
  std::vector<float> data(count * dim);
  for (auto& x : data) x = r.f32();

  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16();
    ids.push_back(r.str(len));
  }
  r.expect_end();
  return EmbeddingMatrix(dim, std::move(ids), std::move(data), (flags & 1u) != 0);
}

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  binary::write_file(path, encode_embeddings(m));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(binary::read_file(path));
}

}  // namespace d4
