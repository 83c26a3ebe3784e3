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

#include <numeric>
#include <set>

#include "d4/corpus.hpp"
#include "d4/error.hpp"
#include "d4/parallel.hpp"
#include "support.hpp"

using namespace d4;

TEST_CASE("token counting") {
  CHECK(count_tokens("a  b\tc", TokenCounter::whitespace()) == 3);
  CHECK(count_tokens("", TokenCounter::whitespace()) == 0);
  CHECK(count_tokens("  \n ", TokenCounter::whitespace()) == 0);
  CHECK(count_tokens("abcdefghij", TokenCounter::fixed_chars(4)) == 3);
  CHECK(count_tokens("abcdefgh", TokenCounter::fixed_chars(4)) == 2);
  // Four code points, eight bytes.
  CHECK(count_tokens("\xc3\xa9\xc3\xa9\xc3\xa9\xc3\xa9", TokenCounter::fixed_chars(2)) == 2);
  CHECK_THROWS_AS(TokenCounter::fixed_chars(0), ValidationError);
}

TEST_CASE("DocumentSet conserves tokens and rejects duplicate ids") {
  DocumentSet set({{"a", "x y", 2, {}}, {"b", "z", 1, {}}});
  CHECK(set.total_tokens() == 3);
  CHECK_THROWS_AS(DocumentSet({{"a", "x", 1, {}}, {"a", "y", 1, {}}}), ValidationError);
}

TEST_CASE("load_corpus keeps file order and token counts") {
  fixture::TempDir dir;
  fixture::write_text(dir / "c.jsonl",
                      "{\"id\":\"b\",\"text\":\"one two\"}\n\n"
                      "{\"id\":\"a\",\"text\":\"three\",\"meta\":{\"k\":\"v\"}}\n");
  const DocumentSet docs = load_corpus(dir / "c.jsonl");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "b");
  CHECK(docs[0].token_count == 2);
  CHECK(docs[1].meta.at("k") == "v");
  CHECK(docs.total_tokens() == 3);

  write_corpus(docs, dir / "out.jsonl");
  const DocumentSet again = load_corpus(dir / "out.jsonl");
  REQUIRE(again.size() == 2);
  CHECK(again[1].text == "three");
  CHECK(again[1].meta == docs[1].meta);
}

TEST_CASE("load_corpus errors cite the line or the id") {
  fixture::TempDir dir;
  fixture::write_text(dir / "bad.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\",\n");
  try {
    load_corpus(dir / "bad.jsonl");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  fixture::write_text(dir / "notext.jsonl", "{\"id\":\"a\"}\n");
  CHECK_THROWS_AS(load_corpus(dir / "notext.jsonl"), ParseError);

  fixture::write_text(dir / "dup.jsonl", "{\"id\":\"same\",\"text\":\"x\"}\n{\"id\":\"same\",\"text\":\"y\"}\n");
  try {
    load_corpus(dir / "dup.jsonl");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("same") != std::string::npos);
  }

  CHECK_THROWS_AS(load_corpus(dir / "missing.jsonl"), IoError);
}

TEST_CASE("synthesize_corpus size and labels") {
  SynthSpec s;
  s.n_topics = 2;
  s.docs_per_topic = 3;
  const DocumentSet docs = synthesize_corpus(s);
  CHECK(docs.size() == 6);
  for (const auto& d : docs) CHECK(d.meta.at("group") == "none");

  SynthSpec p = fixture::planted_spec();
  const DocumentSet planted = synthesize_corpus(p);
  CHECK(planted.size() == p.corpus_size());
  CHECK(planted.size() == 1000);
  std::size_t templates = 0;
  for (const auto& d : planted) templates += d.meta.at("kind") == "template";
  CHECK(templates == 100);
}

TEST_CASE("mutation-free template groups are byte-identical") {
  SynthSpec s;
  s.n_topics = 3;
  s.docs_per_topic = 5;
  s.n_template_groups = 1;
  s.dupes_per_group = 4;
  s.template_mutation_rate = 0.0;
  const DocumentSet docs = synthesize_corpus(s);
  std::set<std::string> texts;
  std::size_t members = 0;
  for (const auto& d : docs) {
    if (d.meta.at("group") == "0") {
      texts.insert(d.text);
      ++members;
    }
  }
  CHECK(members == 4);
  CHECK(texts.size() == 1);

  s.n_template_groups = 6;
  s.seed = 9;
  std::map<std::string, std::set<std::string>> by_group;
  for (const auto& d : synthesize_corpus(s)) {
    if (d.meta.at("kind") == "template") by_group[d.meta.at("group")].insert(d.text);
  }
  CHECK(by_group.size() == 6);
  for (const auto& [g, t] : by_group) CHECK(t.size() == 1);
}

TEST_CASE("synthesize_corpus is deterministic under seed and thread count") {
  SynthSpec s = fixture::planted_spec(5);
  set_num_threads(1);
  const DocumentSet a = synthesize_corpus(s);
  set_num_threads(8);
  const DocumentSet b = synthesize_corpus(s);
  set_num_threads(1);
  REQUIRE(a.size() == b.size());
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) same = same && a[i].id == b[i].id && a[i].text == b[i].text;
  CHECK(same);

  s.seed = 6;
  const DocumentSet c = synthesize_corpus(s);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i].text != c[i].text;
  CHECK(differs);
}

TEST_CASE("synthesized ids sort in file order and tokens are conserved") {
  const DocumentSet docs = synthesize_corpus(fixture::planted_spec());
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    sum += docs[i].token_count;
    CHECK(docs[i].token_count == count_tokens(docs[i].text, TokenCounter::whitespace()));
    if (i > 0) CHECK(docs[i - 1].id < docs[i].id);
  }
  CHECK(sum == docs.total_tokens());
}

TEST_CASE("SynthSpec validation") {
  SynthSpec s;
  s.min_length = 10;
  s.max_length = 5;
  CHECK_THROWS_AS(synthesize_corpus(s), ValidationError);
  s = SynthSpec{};
  s.n_template_groups = 1;
  s.dupes_per_group = 1;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = SynthSpec{};
  s.template_mutation_rate = 1.5;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
