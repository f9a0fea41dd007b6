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

#include <cmath>
#include <set>

#include "doctest.h"
#include "eval.h"
#include "status.h"
#include "synth.h"
#include "test_util.h"
#include "util.h"

namespace nerpipe {
namespace {

SynthConfig Small(double coverage, double noise, uint64_t seed = 1) {
  SynthConfig c = SynthConfig::Defaults();
  c.n_sentences = 1500;
  c.n_names = 200;
  c.n_unlabeled = 100;
  c.dict_coverage = coverage;
  c.boundary_noise = noise;
  c.seed = seed;
  return c;
}

TEST_CASE("full coverage without noise reproduces gold") {
  SynthCorpus c = GenerateCorpus(Small(1.0, 0.0));
  CHECK(c.train.layer("coarse") == c.train.layer("gold"));
  CHECK(c.dictionary.size() == 200);
}

TEST_CASE("zero coverage yields no coarse spans") {
  SynthCorpus c = GenerateCorpus(Small(0.0, 0.0));
  CHECK(c.dictionary.empty());
  for (const SpanList& spans : c.train.layer("coarse")) CHECK(spans.empty());
}

TEST_CASE("coarse recall concentrates near the coverage") {
  SynthConfig config = SynthConfig::Defaults();
  config.n_unlabeled = 0;
  config.boundary_noise = 0.0;
  config.dict_coverage = 0.6;
  SynthCorpus c = GenerateCorpus(config);
  EntityMetrics m = EntityPrf(c.train.layer("coarse"), c.train.layer("gold"));
  const std::size_t gold = m.true_positives + m.false_negatives;
  CHECK(gold >= 5000);
  CHECK(m.recall >= 0.55);
  CHECK(m.recall <= 0.65);
  CHECK(m.precision == 1.0);
  CHECK(c.dictionary.size() == static_cast<std::size_t>(std::lround(0.6 * config.n_names)));
}

TEST_CASE("noise moves boundaries by one position") {
  SynthCorpus clean = GenerateCorpus(Small(1.0, 0.0, 4));
  SynthCorpus noisy = GenerateCorpus(Small(1.0, 0.3, 4));
  const auto& gold = clean.train.layer("gold");
  const auto& coarse = noisy.train.layer("coarse");
  std::size_t moved = 0, total = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    REQUIRE(coarse[i].size() == gold[i].size());
    for (std::size_t k = 0; k < gold[i].size(); ++k) {
      ++total;
      const int ds = std::abs(coarse[i][k].start - gold[i][k].start);
      const int de = std::abs(coarse[i][k].end - gold[i][k].end);
      REQUIRE(ds + de <= 1);
      moved += ds + de;
    }
  }
  CHECK(moved > 0.2 * total);
  CHECK(moved < 0.4 * total);
}

TEST_CASE("splits are disjoint and the dictionary has no dead entries") {
  SynthCorpus c = GenerateCorpus(Small(0.6, 0.05, 9));
  std::set<std::string> ids;
  std::size_t n = 0;
  for (const Dataset* d : {&c.train, &c.dev, &c.test, &c.unlabeled}) {
    for (const Sentence& s : d->sentences()) {
      ids.insert(s.id);
      ++n;
    }
  }
  CHECK(ids.size() == n);
  CHECK(c.train.size() + c.dev.size() + c.test.size() == 1500);
  CHECK(c.dev.size() == 150);
  CHECK(c.test.size() == 150);
  CHECK(c.unlabeled.size() == 100);
  CHECK(c.unlabeled.LayerNames().empty());

  std::string all;
  for (const Dataset* d : {&c.train, &c.dev, &c.test}) {
    for (const Sentence& s : d->sentences()) all += s.text + "\n";
  }
  for (const DictionaryEntry& e : c.dictionary.entries()) {
    CHECK(all.find(e.surface) != std::string::npos);
  }
  for (const std::string& name : c.names) CHECK(all.find(name) != std::string::npos);
}

TEST_CASE("generation is deterministic down to the bytes") {
  testing::TempDir dir;
  SynthConfig config = Small(0.6, 0.05, 3);
  auto a = WriteCorpus(GenerateCorpus(config), config, dir.Path("a"));
  auto b = WriteCorpus(GenerateCorpus(config), config, dir.Path("b"));
  CHECK(a == b);
  for (const auto& [name, crc] : a) {
    CHECK(ReadFile(dir.Path("a/" + name)) == ReadFile(dir.Path("b/" + name)));
  }
  SynthConfig other = Small(0.6, 0.05, 4);
  CHECK(WriteCorpus(GenerateCorpus(other), other, dir.Path("c")) != a);
}

TEST_CASE("config validation and json") {
  SynthConfig c = Small(0.6, 0.05);
  CHECK(SynthConfig::FromJson(nlohmann::json::parse(c.ToJson().dump())).ToJson() == c.ToJson());
  auto code = [](const nlohmann::json& j) {
    try {
      SynthConfig::FromJson(j).Validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInternal;
  };
  CHECK(code({{"dict_coverage", 1.5}}) == ErrorCode::kConfig);
  CHECK(code({{"boundary_noise", -0.1}}) == ErrorCode::kConfig);
  CHECK(code({{"carrier_templates", nlohmann::json::array()}}) == ErrorCode::kConfig);
  CHECK(code({{"name_grammar", {{"syllables", nlohmann::json::array()}}}}) == ErrorCode::kConfig);
  CHECK(code({{"n_sentences", "many"}}) == ErrorCode::kConfig);
}

}  // namespace
}  // namespace nerpipe
