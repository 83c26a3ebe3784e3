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

#include "d4/corpus.hpp"

#include <algorithm>
#include "json.hpp"

#include "d4/error.hpp"
#include "d4/random.hpp"

namespace d4 {

using nlohmann::json;

namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::size_t count_code_points(std::string_view text) noexcept {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace

TokenCounter TokenCounter::fixed_chars(std::size_t c) {
  if (c == 0) throw ValidationError("fixed-chars token counter needs chars_per_token >= 1");
  return TokenCounter{Kind::fixed_chars, c};
}

std::uint64_t TokenCounter::count(std::string_view text) const {
  switch (kind) {
    case Kind::whitespace: return split_whitespace(text).size();
    case Kind::fixed_chars: {
      const std::size_t chars = count_code_points(text);
      return (chars + chars_per_token - 1) / chars_per_token;
    }
  }
  return 0;
}

std::uint64_t count_tokens(std::string_view text, const TokenCounter& counter) {
  return counter.count(text);
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

DocumentSet::DocumentSet(std::vector<Document> docs) : docs_(std::move(docs)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(docs_.size());
  for (const auto& d : docs_) {
    if (!seen.insert(d.id).second) throw ValidationError("duplicate document id \"" + d.id + "\"");
    total_tokens_ += d.token_count;
  }
}

std::vector<std::string> DocumentSet::ids() const {
  std::vector<std::string> out;
  out.reserve(docs_.size());
  for (const auto& d : docs_) out.push_back(d.id);
  return out;
}

DocumentSet DocumentSet::subset(std::span<const std::size_t> rows) const {
  std::vector<Document> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(docs_.at(r));
  return DocumentSet(std::move(out));
}

CorpusReader::CorpusReader(const std::filesystem::path& path, TokenCounter counter)
    : in_(path), counter_(counter) {
  if (!in_) throw IoError("cannot open corpus " + path.string());
}

std::optional<Document> CorpusReader::next() {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (std::all_of(raw.begin(), raw.end(), is_space)) continue;

    json rec;
    try {
      rec = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ParseError(line_, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(line_, "record is not a JSON object");
    const auto id = rec.find("id");
    if (id == rec.end() || !id->is_string()) throw ParseError(line_, "missing string field \"id\"");
    const auto text = rec.find("text");
    if (text == rec.end() || !text->is_string()) {
      throw ParseError(line_, "missing string field \"text\"");
    }

    Document doc;
    doc.id = id->get<std::string>();
    doc.text = text->get<std::string>();
    doc.token_count = counter_.count(doc.text);
    if (const auto meta = rec.find("meta"); meta != rec.end() && !meta->is_null()) {
      if (!meta->is_object()) throw ParseError(line_, "field \"meta\" is not an object");
      for (const auto& [key, value] : meta->items()) {
        doc.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    if (!seen_.insert(doc.id).second) {
      throw ValidationError("duplicate document id \"" + doc.id + "\" at line " +
                            std::to_string(line_));
    }
    return doc;
  }
  if (in_.bad()) throw IoError("error reading corpus at line " + std::to_string(line_));
  return std::nullopt;
}

DocumentSet load_corpus(const std::filesystem::path& path, const TokenCounter& counter) {
  CorpusReader reader(path, counter);
  std::vector<Document> docs;
  while (auto doc = reader.next()) docs.push_back(std::move(*doc));
  return DocumentSet(std::move(docs));
}

void write_corpus(const DocumentSet& docs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  for (const auto& d : docs) {
    json rec = {{"id", d.id}, {"text", d.text}};
    if (!d.meta.empty()) rec["meta"] = d.meta;
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

void SynthSpec::validate() const {
  if (n_topics == 0) throw ValidationError("n_topics must be positive");
  if (docs_per_topic == 0) throw ValidationError("docs_per_topic must be positive");
  if (n_template_groups > 0 && dupes_per_group < 2) {
    throw ValidationError("dupes_per_group must be >= 2");
  }
  if (!(template_mutation_rate >= 0.0 && template_mutation_rate <= 1.0)) {
    throw ValidationError("template_mutation_rate must lie in [0, 1]");
  }
  if (vocab_size < n_topics) throw ValidationError("vocab_size must be >= n_topics");
  if (min_length > max_length) {
    throw ValidationError("doc_length_range min (" + std::to_string(min_length) +
                          ") exceeds max (" + std::to_string(max_length) + ")");
  }
  if (max_length == 0) throw ValidationError("doc_length_range max must be positive");
}

namespace {

constexpr double kSlotFraction = 0.3;
// Topic words per topic; small enough that same-topic documents share words.
constexpr std::size_t kMaxTopicBlock = 32;

struct Draft {
  std::vector<std::size_t> words;
  std::optional<std::size_t> topic;
  std::optional<std::size_t> group;
};

class TopicModel {
 public:
  TopicModel(const SynthSpec& spec)
      : vocab_(spec.vocab_size),
        block_(std::min<std::size_t>(kMaxTopicBlock, spec.vocab_size / spec.n_topics)),
        min_len_(spec.min_length),
        max_len_(spec.max_length) {}

  std::vector<std::size_t> document(std::size_t topic, Rng& rng) const {
    const std::size_t len = min_len_ + rng.below(max_len_ - min_len_ + 1);
    const double affinity = 0.3 + 0.5 * rng.uniform();
    std::vector<std::size_t> words(len);
    for (auto& w : words) {
      w = rng.bernoulli(affinity) ? topic * block_ + rng.below(block_) : rng.below(vocab_);
    }
    return words;
  }

  std::vector<std::size_t> random_document(Rng& rng) const {
    std::vector<std::size_t> words(min_len_ + rng.below(max_len_ - min_len_ + 1));
    for (auto& w : words) w = rng.below(vocab_);
    return words;
  }

  std::size_t random_word(Rng& rng) const { return rng.below(vocab_); }

 private:
  std::size_t vocab_;
  std::size_t block_;
  std::size_t min_len_;
  std::size_t max_len_;
};

std::string render(const std::vector<std::size_t>& words) {
  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) text += ' ';
    text += 'w';
    text += std::to_string(words[i]);
  }
  return text;
}

}  // namespace

DocumentSet synthesize_corpus(const SynthSpec& spec, const TokenCounter& counter) {
  spec.validate();
  Rng rng(spec.seed);
  const TopicModel model(spec);

  std::vector<Draft> drafts;
  drafts.reserve(spec.corpus_size());
  for (std::size_t t = 0; t < spec.n_topics; ++t) {
    for (std::size_t i = 0; i < spec.docs_per_topic; ++i) {
      drafts.push_back({model.document(t, rng), t, std::nullopt});
    }
  }
  // Template groups share one skeleton and differ in their slot words, like
  // pages stamped out of a single generator.
  const auto skeleton = model.random_document(rng);
  std::vector<bool> slot(skeleton.size());
  for (std::size_t p = 0; p < slot.size(); ++p) slot[p] = rng.bernoulli(kSlotFraction);
  for (std::size_t g = 0; g < spec.n_template_groups; ++g) {
    auto tmpl = skeleton;
    for (std::size_t p = 0; p < tmpl.size(); ++p) {
      if (slot[p]) tmpl[p] = model.random_word(rng);
    }
    for (std::size_t c = 0; c < spec.dupes_per_group; ++c) {
      auto copy = tmpl;
      for (auto& w : copy) {
        if (rng.bernoulli(spec.template_mutation_rate)) w = model.random_word(rng);
      }
      drafts.push_back({std::move(copy), std::nullopt, g});
    }
  }

  const auto order = random_permutation(drafts.size(), rng);
  const std::size_t width = std::max<std::size_t>(6, std::to_string(drafts.size()).size());
  std::vector<Document> docs;
  docs.reserve(drafts.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const Draft& draft = drafts[order[pos]];
    std::string num = std::to_string(pos);
    Document doc;
    doc.id = "doc" + std::string(width - num.size(), '0') + num;
    doc.text = render(draft.words);
    doc.token_count = counter.count(doc.text);
    doc.meta["kind"] = draft.group ? "template" : "topic";
    doc.meta["topic"] = draft.topic ? std::to_string(*draft.topic) : "none";
    doc.meta["group"] = draft.group ? std::to_string(*draft.group) : "none";
    docs.push_back(std::move(doc));
  }
  return DocumentSet(std::move(docs));
}

}  // namespace d4
