// Copyright 2026 The nerpipe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "corpus.h"
#include "doctest.h"
#include "oracles.h"
#include "status.h"
#include "test_util.h"
#include "util.h"

namespace nerpipe {
namespace {

std::vector<std::string> Texts(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.push_back(s.text);
  return out;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

TEST_CASE("split keeps delimiters attached") {
  CHECK(Texts(SplitSentences("A。B！C")) == std::vector<std::string>{"A。", "B！", "C"});
  CHECK(SplitSentences("").empty());
  CHECK(Texts(SplitSentences("no delimiters here")) ==
        std::vector<std::string>{"no delimiters here"});
  CHECK(Texts(SplitSentences("甲；乙\n丙？")) ==
        std::vector<std::string>{"甲；", "乙\n", "丙？"});
}

TEST_CASE("split is lossless and never yields empty sentences") {
  std::mt19937_64 rng(7);
  const std::u32string pool = U"ab公司。！？；\n ";
  for (int trial = 0; trial < 500; ++trial) {
    std::u32string text;
    const int n = static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) text += pool[rng() % pool.size()];
    const std::string utf8 = EncodeUtf8(text);
    std::string joined;
    std::set<std::string> ids;
    for (const auto& s : SplitSentences(utf8)) {
      REQUIRE(!s.text.empty());
      joined += s.text;
      ids.insert(s.id);
    }
    CHECK(joined == utf8);
    CHECK(ids.size() == SplitSentences(utf8).size());
  }
}

TEST_CASE("spans to tags") {
  LabelScheme scheme;
  CHECK(SpansToTags(4, {{1, 3, "COM"}}, scheme) == TagSequence{0, 1, 2, 0});
  CHECK(SpansToTags(3, {}, scheme) == TagSequence{0, 0, 0});
  CHECK(CodeOf([&] { SpansToTags(3, {{0, 2, "COM"}, {1, 3, "COM"}}, scheme); }) ==
        ErrorCode::kOverlap);
  CHECK(CodeOf([&] { SpansToTags(3, {{1, 4, "COM"}}, scheme); }) == ErrorCode::kRange);
  CHECK(CodeOf([&] { SpansToTags(3, {{2, 2, "COM"}}, scheme); }) == ErrorCode::kRange);
  CHECK(CodeOf([&] { SpansToTags(3, {{0, 1, "ORG"}}, scheme); }) == ErrorCode::kUnknownLabel);
}

TEST_CASE("tags to spans repairs stray inside tags") {
  CHECK(TagsToSpans(std::vector<std::string>{"B-COM", "I-COM", "O"}) ==
        SpanList{{0, 2, "COM"}});
  CHECK(TagsToSpans(std::vector<std::string>{"O", "I-COM"}) == SpanList{{1, 2, "COM"}});
  CHECK(TagsToSpans(std::vector<std::string>{"O", "O", "O"}).empty());
  CHECK(TagsToSpans(std::vector<std::string>{"B-A", "I-B", "I-B"}) ==
        SpanList{{0, 1, "A"}, {1, 3, "B"}});
  LabelScheme scheme;
  CHECK(TagsToSpans(TagSequence{2, 2, 0, 1, 1}, scheme) ==
        SpanList{{0, 2, "COM"}, {3, 4, "COM"}, {4, 5, "COM"}});
}

TEST_CASE("spans and tags round-trip on random span sets") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> labels = {"COM", "PER", "LOC"};
  LabelScheme scheme(labels);
  for (int trial = 0; trial < 2000; ++trial) {
    const int length = static_cast<int>(rng() % 25);
    SpanList spans = oracle::RandomSpans(rng, length, labels);
    TagSequence tags = SpansToTags(length, spans, scheme);
    std::vector<std::string> names;
    for (int t : tags) names.push_back(scheme.TagName(t));
    REQUIRE(names == oracle::TagStrings(length, spans));
    REQUIRE(TagsToSpans(tags, scheme) == spans);
    REQUIRE(TagsToSpans(names) == spans);
  }
}

TEST_CASE("indices count scalar values, not bytes") {
  Sentence s = Sentence::Make("x", "中国平安😀集团");
  CHECK(s.length() == 7);
  Dataset d;
  d.AddSentence(s);
  d.SetLayer("gold", {{{0, 4, "COM"}, {5, 7, "COM"}}});
  Dataset back = ParseJsonl(SerializeJsonl(d));
  CHECK(back.layer("gold")[0] == d.layer("gold")[0]);
  CHECK_THROWS_AS(d.SetLayer("bad", {{{5, 8, "COM"}}}), Error);
}

TEST_CASE("jsonl serialization is canonical and round-trips byte-exactly") {
  Dataset d;
  d.AddSentence(Sentence::Make("s1", "恒大集团发布公告"));
  d.AddSentence(Sentence::Make("s2", "no entity"));
  d.SetLayer("gold", {{{0, 4, "COM"}}, {}});
  d.SetLayer("coarse", {{{0, 2, "COM"}}, {}});
  const std::string text = SerializeJsonl(d);
  CHECK(text.find(R"({"id":"s1","text":"恒大集团发布公告","layers":{"coarse":)") == 0);
  Dataset back = ParseJsonl(text);
  CHECK(back == d);
  CHECK(SerializeJsonl(back) == text);

  testing::TempDir dir;
  SaveDataset(d, dir.Path("d.jsonl"), DatasetFormat::kJsonl);
  CHECK(LoadDataset(dir.Path("d.jsonl"), DatasetFormat::kJsonl) == d);
  CHECK(ReadFile(dir.Path("d.jsonl")) == text);
}

TEST_CASE("jsonl parse errors carry the line number") {
  std::string text;
  for (int i = 1; i <= 6; ++i) {
    text += R"({"id":"s)" + std::to_string(i) + R"(","text":"ab","layers":{}})" "\n";
  }
  text += "{\"id\": \"s7\", \"text\": \n";
  try {
    ParseJsonl(text);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    REQUIRE(e.line().has_value());
    CHECK(*e.line() == 7);
  }
}

TEST_CASE("duplicate ids are rejected") {
  const std::string text =
      R"({"id":"a","text":"x","layers":{}})" "\n" R"({"id":"a","text":"y","layers":{}})" "\n";
  CHECK_THROWS_AS(ParseJsonl(text), Error);
}

TEST_CASE("invalid spans repaired or rejected on load") {
  const std::string text =
      R"({"id":"a","text":"abcd","layers":{"gold":[{"start":0,"end":2,"label":"COM"},{"start":1,"end":3,"label":"COM"},{"start":3,"end":9,"label":"COM"}]}})"
      "\n";
  std::size_t repaired = 0;
  Dataset d = ParseJsonl(text, LoadOptions{true, "gold"}, &repaired);
  CHECK(d.layer("gold")[0] == SpanList{{0, 2, "COM"}});
  CHECK(repaired == 2);
  CHECK(CodeOf([&] { ParseJsonl(text, LoadOptions{false, "gold"}); }) == ErrorCode::kInvariant);
}

TEST_CASE("column format") {
  Dataset d = ParseColumn("A\tB-COM\nB\tI-COM\n\n");
  REQUIRE(d.size() == 1);
  CHECK(d.sentence(0).text == "AB");
  CHECK(d.layer("gold")[0] == SpanList{{0, 2, "COM"}});

  Dataset two;
  two.AddSentence(Sentence::Make("s1", "平安银行"));
  two.AddSentence(Sentence::Make("s2", "好"));
  two.SetLayer("gold", {{{0, 4, "COM"}}, {}});
  const std::string text = SerializeColumn(two);
  Dataset back = ParseColumn(text);
  CHECK(back == two);
  CHECK(SerializeColumn(back) == text);

  Dataset layered = two;
  layered.SetLayer("coarse", {{}, {}});
  CHECK_THROWS_AS(SerializeColumn(layered), Error);
}

TEST_CASE("format sniffing") {
  CHECK(SniffFormat("\n  {\"id\":\"a\"}") == DatasetFormat::kJsonl);
  CHECK(SniffFormat("# id = a\nx\tO\n") == DatasetFormat::kColumn);
  CHECK(SniffFormat("") == DatasetFormat::kColumn);
}

TEST_CASE("column repair turns stray I into B") {
  Dataset d = ParseColumn("x\tO\ny\tI-COM\nz\tI-COM\n\n");
  CHECK(d.layer("gold")[0] == SpanList{{1, 3, "COM"}});
}

TEST_CASE("label scheme") {
  LabelScheme s({"COM", "PER"});
  CHECK(s.num_tags() == 5);
  CHECK(s.TagName(0) == "O");
  CHECK(s.TagName(3) == "B-PER");
  CHECK(s.TagIndex("I-COM") == 2);
  CHECK(s.TagIndex("I-XYZ") == -1);
  CHECK_THROWS_AS(LabelScheme({"A", "A"}), Error);
  CHECK_THROWS_AS(LabelScheme({"A B"}), Error);
  CHECK_THROWS_AS(LabelScheme(std::vector<std::string>{}), Error);
}

TEST_CASE("malformed utf-8 is a parse error") {
  CHECK(CodeOf([] { DecodeUtf8("\xC0\xAF"); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { DecodeUtf8("\xED\xA0\x80"); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { DecodeUtf8("\xE4\xB8"); }) == ErrorCode::kParse);
  CHECK(EncodeUtf8(DecodeUtf8("中文 ok 😀")) == "中文 ok 😀");
}

}  // namespace
}  // namespace nerpipe
