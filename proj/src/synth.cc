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

#include "synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "status.h"
#include "util.h"

namespace nerpipe {

namespace {

std::vector<std::string> SplitChars(const char* pool) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (char32_t c : DecodeUtf8(pool)) {
    if (c == U' ') continue;
    std::string s;
    AppendUtf8(c, &s);
    if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

std::size_t CountSlots(const std::string& tmpl) {
  std::size_t n = 0;
  for (std::size_t pos = tmpl.find("{}"); pos != std::string::npos;
       pos = tmpl.find("{}", pos + 2)) {
    ++n;
  }
  return n;
}

template <typename T>
void ReadIf(const nlohmann::json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

struct Generated {
  std::string text;
  SpanList spans;
};

}  // namespace

SynthConfig SynthConfig::Defaults() {
  SynthConfig c;
  c.name_grammar.syllables = SplitChars(
      "华信中泰安恒瑞达鑫隆盛海天金宏远东方新明光通利兴永丰德嘉佳荣祥福宝长"
      "城阳辉博创源龙凯鹏峰汇联正昌顺康富鼎盈润晨星亿万启航泽宇旭欣蓝银铭锦"
      "晟诚卓越精飞腾云山江湖南北西京沪粤浙苏川鲁豫湘赣闽桂滇黔徽晋冀辽吉黑"
      "豪雅美嘉文武志国民建景林森洋波涛");
  c.name_grammar.industry_words = {
      "科技", "电子", "能源", "医药", "化工", "建设", "地产", "物流", "传媒",
      "食品", "环保", "材料", "机械", "电气", "通信", "软件", "证券", "银行",
      "保险", "投资", "生物", "汽车", "农业", "钢铁", "纺织"};
  c.name_grammar.suffixes = {"股份有限公司", "有限公司", "集团",
                             "集团股份有限公司", "控股", "有限责任公司"};
  c.carrier_templates = {
      "据报道，{}今日发布公告称，公司上半年净利润同比增长。",
      "{}与{}签署战略合作协议。",
      "记者从{}获悉，该公司将于下月召开股东大会。",
      "{}发布业绩预告，预计全年营收稳步增长。",
      "受市场情绪影响，{}股价今日大幅下跌。",
      "{}董事会审议通过了对外投资议案。",
      "证监会对{}涉嫌信息披露违规立案调查。",
      "{}拟收购{}全部股权。",
      "昨日，{}宣布完成新一轮融资。",
      "分析人士认为，{}的市场份额有望继续扩大。",
      "{}因违规担保被交易所出具警示函。",
      "截至发稿，{}尚未对此事作出回应。",
      "{}控股股东所持股份被司法冻结。",
      "{}与{}就专利纠纷达成和解。",
      "多家机构上调了{}的评级。",
      "{}计划在海外设立子公司。",
      "投资者关注{}的债务风险。",
      "{}公告称，副总经理因个人原因辞职。",
      "本周，{}获得银行授信额度。",
      "行业龙头{}再度扩产。",
      "{}的年报显示，研发投入持续增加。",
      "有消息称，{}正在筹划重大资产重组。",
      "{}起诉{}合同违约。",
      "在此次招标中，{}中标多个项目。",
      "{}旗下子公司发生安全事故。",
      "科技板块全线上涨，{}领涨。",
      "银行业监管趋严，{}面临压力。",
      "据悉，{}已向法院申请破产重整。",
      "{}今年以来累计回购股份。",
      "{}和{}联合发布新产品。",
  };
  return c;
}

SynthConfig SynthConfig::FromJson(const nlohmann::json& j) {
  SynthConfig c = Defaults();
  try {
    ReadIf(j, "n_sentences", &c.n_sentences);
    ReadIf(j, "n_names", &c.n_names);
    ReadIf(j, "dict_coverage", &c.dict_coverage);
    ReadIf(j, "boundary_noise", &c.boundary_noise);
    ReadIf(j, "n_unlabeled", &c.n_unlabeled);
    ReadIf(j, "dev_fraction", &c.dev_fraction);
    ReadIf(j, "test_fraction", &c.test_fraction);
    ReadIf(j, "label", &c.label);
    ReadIf(j, "seed", &c.seed);
    ReadIf(j, "carrier_templates", &c.carrier_templates);
    if (j.contains("name_grammar")) {
      const auto& g = j.at("name_grammar");
      if (g.contains("syllables")) {
        c.name_grammar.syllables.clear();
        for (const auto& s : g.at("syllables")) {
          c.name_grammar.syllables.push_back(s.get<std::string>());
        }
      }
      ReadIf(g, "min_syllables", &c.name_grammar.min_syllables);
      ReadIf(g, "max_syllables", &c.name_grammar.max_syllables);
      ReadIf(g, "industry_words", &c.name_grammar.industry_words);
      ReadIf(g, "industry_prob", &c.name_grammar.industry_prob);
      ReadIf(g, "suffixes", &c.name_grammar.suffixes);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("synth config: ") + e.what());
  }
  c.Validate();
  return c;
}

nlohmann::ordered_json SynthConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["n_sentences"] = n_sentences;
  j["n_names"] = n_names;
  j["dict_coverage"] = dict_coverage;
  j["boundary_noise"] = boundary_noise;
  j["n_unlabeled"] = n_unlabeled;
  j["dev_fraction"] = dev_fraction;
  j["test_fraction"] = test_fraction;
  j["label"] = label;
  j["seed"] = seed;
  j["name_grammar"] = {{"syllables", name_grammar.syllables},
                       {"min_syllables", name_grammar.min_syllables},
                       {"max_syllables", name_grammar.max_syllables},
                       {"industry_words", name_grammar.industry_words},
                       {"industry_prob", name_grammar.industry_prob},
                       {"suffixes", name_grammar.suffixes}};
  j["carrier_templates"] = carrier_templates;
  return j;
}

void SynthConfig::Validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kConfig, m); };
  if (!(dict_coverage >= 0.0 && dict_coverage <= 1.0)) {
    fail("dict_coverage must be in [0, 1]");
  }
  if (!(boundary_noise >= 0.0 && boundary_noise <= 1.0)) {
    fail("boundary_noise must be in [0, 1]");
  }
  if (!(dev_fraction >= 0.0 && test_fraction >= 0.0 &&
        dev_fraction + test_fraction < 1.0)) {
    fail("dev_fraction + test_fraction must be < 1");
  }
  if (n_sentences == 0) fail("n_sentences must be > 0");
  if (n_names == 0) fail("n_names must be > 0");
  if (name_grammar.syllables.empty()) fail("syllable pool is empty");
  if (name_grammar.suffixes.empty()) fail("suffix pool is empty");
  if (name_grammar.min_syllables < 1 ||
      name_grammar.max_syllables < name_grammar.min_syllables) {
    fail("bad syllable count range");
  }
  if (name_grammar.industry_prob > 0.0 && name_grammar.industry_words.empty()) {
    fail("industry pool is empty");
  }
  if (carrier_templates.empty()) fail("carrier template pool is empty");
  for (const std::string& t : carrier_templates) {
    if (CountSlots(t) == 0) fail("carrier template without slot: " + t);
  }
  LabelScheme check({label});
}

SynthCorpus GenerateCorpus(const SynthConfig& config) {
  config.Validate();
  Rng rng(config.seed);
  const NameGrammar& g = config.name_grammar;

  // Names: unique, and none contained in another name or in a template.
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 200 * config.n_names + 10000;
  while (names.size() < config.n_names) {
    if (++attempts > max_attempts) {
      throw Error(ErrorCode::kConfig,
                  "name grammar cannot produce " +
                      std::to_string(config.n_names) + " distinct names");
    }
    std::string name;
    int k = g.min_syllables +
            static_cast<int>(rng.Uniform(g.max_syllables - g.min_syllables + 1));
    for (int i = 0; i < k; ++i) {
      name += g.syllables[rng.Uniform(g.syllables.size())];
    }
    if (!g.industry_words.empty() && rng.Bernoulli(g.industry_prob)) {
      name += g.industry_words[rng.Uniform(g.industry_words.size())];
    }
    name += g.suffixes[rng.Uniform(g.suffixes.size())];
    if (seen.count(name) != 0) continue;
    bool clash = false;
    for (const std::string& other : names) {
      if (other.find(name) != std::string::npos ||
          name.find(other) != std::string::npos) {
        clash = true;
        break;
      }
    }
    for (const std::string& t : config.carrier_templates) {
      if (clash) break;
      clash = t.find(name) != std::string::npos;
    }
    if (clash) continue;
    seen.insert(name);
    names.push_back(std::move(name));
  }

  NameDictionary full(1);
  for (const std::string& n : names) full.Add(n, Provenance::kOriginal, config.label);
  const Matcher full_matcher = Matcher::Build(full);

  std::vector<std::size_t> coverage(names.size());
  std::iota(coverage.begin(), coverage.end(), 0);
  rng.Shuffle(coverage);
  std::size_t next_forced = 0;

  auto generate = [&]() -> Generated {
    for (int attempt = 0;; ++attempt) {
      const std::string& tmpl =
          config.carrier_templates[rng.Uniform(config.carrier_templates.size())];
      Generated out;
      std::size_t forced_used = 0;
      std::size_t pos = 0;
      std::size_t chars = 0;
      std::vector<std::size_t> chosen;
      while (true) {
        std::size_t slot = tmpl.find("{}", pos);
        std::string literal = tmpl.substr(pos, slot == std::string::npos
                                                   ? std::string::npos
                                                   : slot - pos);
        out.text += literal;
        chars += DecodeUtf8(literal).size();
        if (slot == std::string::npos) break;
        std::size_t name_index;
        if (next_forced + forced_used < coverage.size()) {
          name_index = coverage[next_forced + forced_used++];
        } else {
          name_index = rng.Uniform(names.size());
        }
        // Two slots in one sentence hold different names.
        if (std::find(chosen.begin(), chosen.end(), name_index) != chosen.end()) {
          name_index = (name_index + 1) % names.size();
        }
        chosen.push_back(name_index);
        const std::string& name = names[name_index];
        std::size_t len = DecodeUtf8(name).size();
        out.spans.push_back({static_cast<int>(chars),
                             static_cast<int>(chars + len), config.label});
        out.text += name;
        chars += len;
        pos = slot + 2;
      }
      // A full-coverage dictionary must reproduce the gold spans exactly.
      if (full_matcher.Match(DecodeUtf8(out.text)) == out.spans || attempt > 50) {
        next_forced += forced_used;
        return out;
      }
    }
  };

  SynthCorpus corpus;
  corpus.names = names;
  std::vector<Generated> labeled(config.n_sentences);
  for (auto& s : labeled) s = generate();

  std::vector<std::size_t> order(labeled.size());
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  const std::size_t n_dev = static_cast<std::size_t>(
      std::llround(config.dev_fraction * config.n_sentences));
  const std::size_t n_test = static_cast<std::size_t>(
      std::llround(config.test_fraction * config.n_sentences));
  std::vector<int> split(labeled.size(), 0);  // 0 train, 1 dev, 2 test
  for (std::size_t k = 0; k < order.size(); ++k) {
    split[order[k]] = k < n_dev ? 1 : (k < n_dev + n_test ? 2 : 0);
  }
  std::vector<SpanList> train_gold, dev_gold, test_gold;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "s%06zu", i + 1);
    Dataset* target = split[i] == 0 ? &corpus.train
                                    : (split[i] == 1 ? &corpus.dev : &corpus.test);
    auto* gold = split[i] == 0 ? &train_gold : (split[i] == 1 ? &dev_gold : &test_gold);
    target->AddSentence(Sentence::Make(id, std::move(labeled[i].text)));
    gold->push_back(std::move(labeled[i].spans));
  }
  corpus.train.SetLayer("gold", std::move(train_gold));
  corpus.dev.SetLayer("gold", std::move(dev_gold));
  corpus.test.SetLayer("gold", std::move(test_gold));

  for (std::size_t i = 0; i < config.n_unlabeled; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "u%06zu", i + 1);
    corpus.unlabeled.AddSentence(Sentence::Make(id, generate().text));
  }

  // Dictionary: a uniformly chosen round(p * n) subset, in name order.
  std::vector<std::size_t> pick(names.size());
  std::iota(pick.begin(), pick.end(), 0);
  rng.Shuffle(pick);
  const std::size_t n_dict = static_cast<std::size_t>(
      std::llround(config.dict_coverage * names.size()));
  pick.resize(n_dict);
  std::sort(pick.begin(), pick.end());
  corpus.dictionary = NameDictionary(1);
  for (std::size_t i : pick) {
    corpus.dictionary.Add(names[i], Provenance::kOriginal, config.label);
  }

  std::vector<SpanList> coarse(corpus.train.size());
  if (!corpus.dictionary.empty()) {
    Matcher matcher = Matcher::Build(corpus.dictionary);
    Dataset annotated = AnnotateCorpus(corpus.train, matcher);
    coarse = annotated.layer("coarse");
  }
  for (std::size_t s = 0; s < coarse.size(); ++s) {
    SpanList& spans = coarse[s];
    const int length = static_cast<int>(corpus.train.sentence(s).length());
    for (std::size_t k = 0; k < spans.size(); ++k) {
      if (!rng.Bernoulli(config.boundary_noise)) continue;
      const int lo = k == 0 ? 0 : spans[k - 1].end;
      const int hi = k + 1 == spans.size() ? length : spans[k + 1].start;
      int moves[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      std::size_t first = rng.Uniform(4);
      for (std::size_t m = 0; m < 4; ++m) {
        const int* d = moves[(first + m) % 4];
        int start = spans[k].start + d[0];
        int end = spans[k].end + d[1];
        if (start >= lo && end <= hi && start < end) {
          spans[k].start = start;
          spans[k].end = end;
          break;
        }
      }
    }
  }
  corpus.train.SetLayer("coarse", std::move(coarse));
  return corpus;
}

std::vector<std::pair<std::string, std::string>> WriteCorpus(
    const SynthCorpus& corpus, const SynthConfig& config,
    const std::string& out_dir) {
  MakeDirs(out_dir);
  std::string names;
  for (const std::string& n : corpus.names) names += n + "\n";
  std::vector<std::pair<std::string, std::string>> files = {
      {"train.jsonl", SerializeJsonl(corpus.train)},
      {"dev.jsonl", SerializeJsonl(corpus.dev)},
      {"test.jsonl", SerializeJsonl(corpus.test)},
      {"unlabeled.jsonl", SerializeJsonl(corpus.unlabeled)},
      {"dict.txt", SerializeDictionary(corpus.dictionary)},
      {"names.txt", names},
      {"synth_config.json", config.ToJson().dump(2) + "\n"},
  };
  std::vector<std::pair<std::string, std::string>> sums;
  for (const auto& [name, contents] : files) {
    AtomicWriteFile(out_dir + "/" + name, contents);
    sums.emplace_back(name, Crc32Hex(contents));
  }
  return sums;
}

}  // namespace nerpipe
