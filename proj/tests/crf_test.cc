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
#include <random>
#include <string>

#include "crf.h"
#include "doctest.h"
#include "eval.h"
#include "oracles.h"
#include "status.h"
#include "test_util.h"
#include "util.h"

namespace nerpipe {
namespace {

TEST_CASE("log partition of uniform chains") {
  CrfParams p = CrfParams::Unconstrained(2);
  CHECK(LogPartition(Matrix(1, 2), p) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(LogPartition(Matrix(2, 2), p) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(LogPartition(Matrix(2, 3), p), Error);
}

TEST_CASE("forward, marginals and viterbi match exhaustive enumeration") {
  std::mt19937_64 rng(20260101);
  int feasible = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const int T = 1 + static_cast<int>(rng() % 3);
    const int L = 1 + static_cast<int>(rng() % 4);
    CrfParams p = oracle::RandomParams(rng, T);
    Matrix e = oracle::RandomEmissions(rng, L, T);
    oracle::Enumeration want = oracle::Enumerate(oracle::FromLibrary(e, p));
    if (!want.feasible) {
      CHECK_THROWS_AS(ViterbiDecode(e, p), Error);
      continue;
    }
    ++feasible;
    REQUIRE(std::abs(LogPartition(e, p) - static_cast<double>(want.log_partition)) <= 1e-8);
    REQUIRE(ViterbiDecode(e, p) == want.argmax);
    Marginals m = ComputeMarginals(e, p);
    for (int i = 0; i < L; ++i) {
      for (int y = 0; y < T; ++y) {
        REQUIRE(std::abs(m.unary(i, y) - static_cast<double>(want.unary[i][y])) <= 1e-8);
        if (i + 1 < L) {
          for (int z = 0; z < T; ++z) {
            REQUIRE(std::abs(m.pairwise[i](y, z) -
                             static_cast<double>(want.pairwise[i][y][z])) <= 1e-8);
          }
        }
      }
    }
  }
  CHECK(feasible >= 500);
}

TEST_CASE("forward stays finite for scores near 1e3") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    CrfParams p = CrfParams::Unconstrained(3);
    for (double& v : p.transitions.data()) v = oracle::Uniform(rng, -1e3, 1e3);
    Matrix e = oracle::RandomEmissions(rng, 4, 3, 1e3);
    oracle::Enumeration want = oracle::Enumerate(oracle::FromLibrary(e, p));
    const double got = LogPartition(e, p);
    REQUIRE(std::isfinite(got));
    CHECK(std::abs(got - static_cast<double>(want.log_partition)) <= 1e-8 * std::abs(got));
  }
}

TEST_CASE("viterbi ties go to the lowest tag index") {
  CrfParams p = CrfParams::Unconstrained(3);
  CHECK(ViterbiDecode(Matrix(3, 3), p) == TagSequence{0, 0, 0});
  Matrix e(2, 3);
  e(0, 1) = e(0, 2) = 1.0;
  e(1, 2) = e(1, 1) = 2.0;
  CHECK(ViterbiDecode(e, p) == TagSequence{1, 1});
}

TEST_CASE("viterbi follows per-position argmax without transitions") {
  CrfParams p = CrfParams::Unconstrained(3);
  Matrix e(4, 3);
  e(0, 2) = 1;
  e(1, 0) = 1;
  e(2, 1) = 1;
  e(3, 2) = 1;
  CHECK(ViterbiDecode(e, p) == TagSequence{2, 0, 1, 2});
}

TEST_CASE("shift invariance") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 3;
    const int L = 1 + static_cast<int>(rng() % 6);
    CrfParams p = CrfParams::ForScheme(LabelScheme(), true);
    for (double& v : p.transitions.data()) v = oracle::Uniform(rng, -2, 2);
    Matrix e = oracle::RandomEmissions(rng, L, T);
    const int i = static_cast<int>(rng() % L);
    const double c = oracle::Uniform(rng, -50, 50);
    Matrix shifted = e;
    for (int y = 0; y < T; ++y) shifted(i, y) += c;
    CHECK(LogPartition(shifted, p) == doctest::Approx(LogPartition(e, p) + c).epsilon(1e-12));
    CHECK(ViterbiDecode(shifted, p) == ViterbiDecode(e, p));
  }
}

TEST_CASE("decoded sequences are always BIO-valid") {
  std::mt19937_64 rng(13);
  LabelScheme scheme({"COM", "PER"});
  CrfParams p = CrfParams::ForScheme(scheme, true);
  for (int trial = 0; trial < 300; ++trial) {
    for (double& v : p.transitions.data()) v = oracle::Uniform(rng, -5, 5);
    Matrix e = oracle::RandomEmissions(rng, 1 + static_cast<int>(rng() % 12), scheme.num_tags(), 5);
    TagSequence tags = ViterbiDecode(e, p);
    REQUIRE(IsValidSequence(p, tags));
    REQUIRE(!LabelScheme::IsInside(tags[0]));
    for (std::size_t k = 1; k < tags.size(); ++k) {
      if (LabelScheme::IsInside(tags[k])) {
        REQUIRE(tags[k - 1] != LabelScheme::kOutside);
        REQUIRE(LabelScheme::LabelOf(tags[k - 1]) == LabelScheme::LabelOf(tags[k]));
      }
    }
  }
}

TEST_CASE("constraint mask forbids the BIO violations") {
  LabelScheme scheme({"A", "B"});
  CrfParams p = CrfParams::ForScheme(scheme, true);
  const int O = 0, BA = 1, IA = 2, BB = 3, IB = 4;
  CHECK_FALSE(p.IsAllowed(O, IA));
  CHECK_FALSE(p.start_allowed[IA]);
  CHECK_FALSE(p.IsAllowed(BA, IB));
  CHECK_FALSE(p.IsAllowed(IA, IB));
  CHECK(p.IsAllowed(BA, IA));
  CHECK(p.IsAllowed(IB, BA));
  CHECK(p.IsAllowed(BB, O));
  CrfParams free = CrfParams::ForScheme(scheme, false);
  CHECK(free.IsAllowed(O, IA));
}

TEST_CASE("infeasible masks are reported") {
  CrfParams p = CrfParams::Unconstrained(2);
  p.start_allowed = {0, 0};
  CHECK_THROWS_AS(ViterbiDecode(Matrix(2, 2), p), Error);
}

TEST_CASE("negative log-likelihood bounds") {
  std::mt19937_64 rng(3);
  CrfParams p = CrfParams::ForScheme(LabelScheme(), true);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix e = oracle::RandomEmissions(rng, 5, 3);
    CHECK(NllAndGradient(e, p, {0, 1, 2, 0, 1}, nullptr) >= 0.0);
  }
  CrfParams single = CrfParams::Unconstrained(1);
  CHECK(NllAndGradient(Matrix(3, 1, 0.7), single, {0, 0, 0}, nullptr) ==
        doctest::Approx(0.0).epsilon(1e-15));
  try {
    NllAndGradient(Matrix(2, 3), p, {0, 2}, nullptr);
    FAIL("expected InvalidGoldError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidGold);
  }
}

TEST_CASE("every parameter gradient matches central finite differences") {
  std::mt19937_64 rng(77);
  const double h = 1e-5;
  const double l2 = 0.05;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    EmitterConfig config;
    config.window = 1;
    config.hash_bits = 5;
    config.hash_seed = rng();
    CrfModel model = CrfModel::Create(LabelScheme(), config, trial % 2 == 0);
    CrfParams& p = model.mutable_params();
    for (double& v : p.transitions.data()) v = oracle::Uniform(rng, -1, 1);
    for (double& v : p.start) v = oracle::Uniform(rng, -1, 1);
    for (double& v : p.end) v = oracle::Uniform(rng, -1, 1);
    FeatureEmitter& em = model.mutable_emitter();
    for (std::size_t f = 0; f < em.dim(); ++f) {
      for (int y = 0; y < 3; ++y) em.set_weight(f, y, oracle::Uniform(rng, -0.5, 0.5));
    }
    const std::u32string pool = U"abc公司";
    std::u32string text;
    const int L = 2 + static_cast<int>(rng() % 3);
    for (int i = 0; i < L; ++i) text += pool[rng() % pool.size()];
    Sentence s = Sentence::Make("g", EncodeUtf8(text));
    TagSequence gold(L, 0);
    gold[0] = 1;
    if (L > 2) gold[1] = 2;

    ModelGradient grad;
    const double loss = ModelObjective(model, s, gold, l2, &grad);
    CHECK(loss == doctest::Approx(static_cast<double>(oracle::Objective(model, s, gold, l2)))
                      .epsilon(1e-10));

    auto fd = [&](auto&& set, double x) {
      set(x + h);
      long double up = oracle::Objective(model, s, gold, l2);
      set(x - h);
      long double down = oracle::Objective(model, s, gold, l2);
      set(x);
      return static_cast<double>((up - down) / (2 * h));
    };
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (!p.IsAllowed(a, b)) continue;
        double x = p.transitions(a, b);
        double want = fd([&](double v) { p.transitions(a, b) = v; }, x);
        worst = std::max(worst, oracle::RelError(grad.transitions(a, b), want));
      }
      if (p.start_allowed[a]) {
        double want = fd([&](double v) { p.start[a] = v; }, p.start[a]);
        worst = std::max(worst, oracle::RelError(grad.start[a], want));
      }
      if (p.end_allowed[a]) {
        double want = fd([&](double v) { p.end[a] = v; }, p.end[a]);
        worst = std::max(worst, oracle::RelError(grad.end[a], want));
      }
    }
    for (std::size_t f = 0; f < em.dim(); ++f) {
      for (int y = 0; y < 3; ++y) {
        double x = em.weight(f, y);
        double want = fd([&](double v) { em.set_weight(f, y, v); }, x);
        worst = std::max(worst, oracle::RelError(grad.emitter[f * 3 + y], want));
      }
    }
  }
  CHECK(worst <= 1e-4);
}

Dataset SeparableSet() {
  const char* names[] = {"甲乙公司", "丙丁集团", "戊己控股", "庚辛银行", "壬癸证券"};
  const char* frames[] = {"今天{}发布公告", "据悉{}上涨", "{}股价大跌", "关于{}的消息"};
  Dataset d;
  std::vector<SpanList> gold;
  for (int i = 0; i < 20; ++i) {
    std::string frame = frames[i % 4];
    std::string name = names[i % 5];
    std::size_t slot = frame.find("{}");
    std::string text = frame.substr(0, slot) + name + frame.substr(slot + 2);
    int start = static_cast<int>(DecodeUtf8(frame.substr(0, slot)).size());
    d.AddSentence(Sentence::Make("t" + std::to_string(i), text));
    gold.push_back({{start, start + 4, "COM"}});
  }
  d.SetLayer("gold", gold);
  return d;
}

TEST_CASE("fit reproduces a separable training set") {
  Dataset d = SeparableSet();
  CrfModel model = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  TrainConfig config;
  config.max_epochs = 50;
  config.patience = 50;
  FitResult r = Fit(&model, {&d, "gold", &d, "gold"}, config);
  CHECK(r.dev_f1.size() <= 50);
  std::vector<SpanList> predicted;
  for (const Sentence& s : d.sentences()) predicted.push_back(model.Predict(s));
  CHECK(EntityPrf(predicted, d.layer("gold")).f1 == 1.0);
}

TEST_CASE("early stopping definition") {
  EarlyStopping stop(2);
  const double history[] = {.5, .7, .9, .9, .8, .6};
  int stopped_after = 0;
  for (int epoch = 1; epoch <= 6; ++epoch) {
    stop.Update(history[epoch - 1]);
    if (stop.ShouldStop()) {
      stopped_after = epoch;
      break;
    }
  }
  CHECK(stopped_after == 5);
  CHECK(stop.best_epoch() == 3);
}

TEST_CASE("fit restores the best epoch and is deterministic") {
  Dataset d = SeparableSet();
  TrainConfig config;
  config.max_epochs = 8;
  config.patience = 2;
  config.seed = 42;
  CrfModel a = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  CrfModel b = a;
  FitResult ra = Fit(&a, {&d, "gold", &d, "gold"}, config);
  FitResult rb = Fit(&b, {&d, "gold", &d, "gold"}, config);
  CHECK(a == b);
  CHECK(ra.dev_f1 == rb.dev_f1);
  REQUIRE(ra.best_epoch >= 1);
  double best = *std::max_element(ra.dev_f1.begin(), ra.dev_f1.end());
  CHECK(ra.dev_f1[ra.best_epoch - 1] == best);
}

TEST_CASE("zero learning rate leaves the model unchanged") {
  Dataset d = SeparableSet();
  CrfModel model = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  model.mutable_params().transitions(0, 1) = 0.25;
  CrfModel before = model;
  TrainConfig config;
  config.learning_rate = 0.0;
  config.l2 = 0.0;
  config.max_epochs = 3;
  Fit(&model, {&d, "gold", &d, "gold"}, config);
  CHECK(model.params() == before.params());
  CHECK(model.emitter().raw_weights() == before.emitter().raw_weights());
}

TEST_CASE("fit rejects empty data and bad configs") {
  Dataset empty;
  Dataset d = SeparableSet();
  CrfModel model = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  CHECK_THROWS_AS(Fit(&model, {&empty, "gold", &d, "gold"}, TrainConfig{}), Error);
  TrainConfig bad;
  bad.patience = 0;
  CHECK_THROWS_AS(bad.Validate(), Error);
  bad = TrainConfig{};
  bad.learning_rate = -1;
  CHECK_THROWS_AS(bad.Validate(), Error);
}

TEST_CASE("divergence is reported") {
  Dataset d = SeparableSet();
  CrfModel model = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  TrainConfig config;
  config.learning_rate = 1e307;
  config.l2 = 0.0;
  config.max_epochs = 3;
  try {
    Fit(&model, {&d, "gold", &d, "gold"}, config);
    FAIL("expected DivergenceError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDivergence);
  }
}

TEST_CASE("model files round-trip exactly") {
  Dataset d = SeparableSet();
  CrfModel model = CrfModel::Create(LabelScheme({"COM", "PER"}), StudentEmitterConfig());
  TrainConfig config;
  config.max_epochs = 3;
  config.seed = 99;
  Fit(&model, {&d, "gold", &d, "gold"}, config);

  testing::TempDir dir;
  const std::string path = dir.Path("m.nermodel");
  SaveModel(model, path);
  CrfModel back = LoadModel(path);
  CHECK(back == model);
  CHECK(back.train_seed() == 99);
  CHECK(SerializeModel(back) == ReadFile(path));

  std::mt19937_64 rng(1);
  const std::u32string pool = U"甲乙丙丁公司集团发布xyz";
  for (int i = 0; i < 100; ++i) {
    std::u32string text;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 20); k < n; ++k) {
      text += pool[rng() % pool.size()];
    }
    Sentence s = Sentence::Make("r", EncodeUtf8(text));
    REQUIRE(back.Decode(s) == model.Decode(s));
  }
}

TEST_CASE("damaged model files are rejected") {
  CrfModel model = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  const std::string bytes = SerializeModel(model);
  auto code = [](const std::string& b) {
    try {
      DeserializeModel(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInternal;
  };
  CHECK(code(bytes.substr(0, bytes.size() / 2)) == ErrorCode::kCorruption);
  CHECK(code(bytes.substr(0, 5)) == ErrorCode::kCorruption);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  CHECK(code(flipped) == ErrorCode::kCorruption);
  std::string bumped = bytes;
  bumped[8] = static_cast<char>(bumped[8] + 1);
  CHECK(code(bumped) == ErrorCode::kVersion);
  CHECK(code("not a model at all") == ErrorCode::kCorruption);
}

TEST_CASE("batch decode matches sequential decode for any thread count") {
  Dataset d = SeparableSet();
  CrfModel model = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  TrainConfig config;
  config.max_epochs = 2;
  Fit(&model, {&d, "gold", &d, "gold"}, config);
  std::vector<TagSequence> one = DecodeBatch(model, d, 1);
  for (int threads : {2, 3, 8}) CHECK(DecodeBatch(model, d, threads) == one);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(one[i] == model.Decode(d.sentence(i)));
}

}  // namespace
}  // namespace nerpipe
