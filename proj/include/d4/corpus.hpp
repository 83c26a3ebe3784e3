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
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace d4 {

/// Proxy tokenizer. Only ratios of token counts matter downstream, so a
/// whitespace split or a fixed characters-per-token estimate is enough.
struct TokenCounter {
  enum class Kind { whitespace, fixed_chars };

  Kind kind = Kind::whitespace;
  std::size_t chars_per_token = 4;

  static TokenCounter whitespace() { return {}; }
  static TokenCounter fixed_chars(std::size_t c);

  std::uint64_t count(std::string_view text) const;
};

std::uint64_t count_tokens(std::string_view text, const TokenCounter& counter);

/// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string_view> split_whitespace(std::string_view text);

struct Document {
  std::string id;
  std::string text;
  std::uint64_t token_count = 0;
  std::map<std::string, std::string> meta;
};

/// Ordered, immutable collection of documents with unique ids.
class DocumentSet {
 public:
  DocumentSet() = default;
  /// Throws ValidationError on a duplicate id.
  explicit DocumentSet(std::vector<Document> docs);

  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }
  std::uint64_t total_tokens() const noexcept { return total_tokens_; }
  const Document& operator[](std::size_t i) const { return docs_[i]; }
  const std::vector<Document>& docs() const noexcept { return docs_; }
  auto begin() const noexcept { return docs_.begin(); }
  auto end() const noexcept { return docs_.end(); }

  std::vector<std::string> ids() const;
  /// Documents at the given positions, in the given order.
  DocumentSet subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<Document> docs_;
  std::uint64_t total_tokens_ = 0;
};

/// Streams documents from a newline-delimited JSON corpus file one record at
/// a time. Each line is {"id": str, "text": str, "meta": {...}?}. Blank lines
/// are skipped. Malformed lines raise ParseError with the line number and
/// repeated ids raise ValidationError naming the id.
class CorpusReader {
 public:
  CorpusReader(const std::filesystem::path& path, TokenCounter counter);

  std::optional<Document> next();
  std::size_t line() const noexcept { return line_; }

 private:
  std::ifstream in_;
  TokenCounter counter_;
  std::size_t line_ = 0;
  std::unordered_set<std::string> seen_;
};

DocumentSet load_corpus(const std::filesystem::path& path,
                        const TokenCounter& counter = TokenCounter::whitespace());
void write_corpus(const DocumentSet& docs, const std::filesystem::path& path);

/// Parameters of the synthetic corpus generator.
///
/// Topic documents are bags of words: each token comes from the topic's own
/// block of at most 32 vocabulary words with a per-document affinity drawn from
/// [0.3, 0.8], otherwise uniformly from the whole vocabulary. All template
/// groups share one random skeleton; a fixed 30% of its positions are slots
/// that each group fills with its own words. A group's template is repeated
/// dupes_per_group times, each copy replacing every token with a random word
/// at probability template_mutation_rate. The final order is a seeded shuffle and ids are
/// "doc" + zero-padded position, so lexicographic id order equals file order.
///
/// Every document carries meta "kind" (topic|template), "topic", and "group"
/// ("none" where it does not apply).
struct SynthSpec {
  std::size_t n_topics = 10;
  std::size_t docs_per_topic = 100;
  std::size_t n_template_groups = 0;
  std::size_t dupes_per_group = 2;
  double template_mutation_rate = 0.0;
  std::size_t vocab_size = 5000;
  std::size_t min_length = 40;
  std::size_t max_length = 120;
  std::uint64_t seed = 0;

  std::size_t corpus_size() const noexcept {
    return n_topics * docs_per_topic + n_template_groups * dupes_per_group;
  }
  void validate() const;
};

DocumentSet synthesize_corpus(const SynthSpec& spec,
                              const TokenCounter& counter = TokenCounter::whitespace());

}  // namespace d4
