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
#include <map>

#include "doctest.h"
#include "error_util.h"
#include "pipeline.h"
#include "test_util.h"
#include "util.h"

namespace nerpipe {
namespace {

namespace fs = std::filesystem;
using testing::CodeOf;

Dataset Coarse(std::vector<std::pair<std::string, SpanList>> rows) {
  Dataset d;
  std::vector<SpanList> spans;
  for (auto& [text, s] : rows) {
    d.AddSentence(Sentence::Make("s" + std::to_string(d.size()), text));
    spans.push_back(std::move(s));
  }
  d.SetLayer("coarse", std::move(spans));
  return d;
}

DisagreementRecord Record(const std::string& id, RecordStatus status,
                          std::optional<SpanList> corrected = std::nullopt) {
  DisagreementRecord r;
  r.sentence_id = id;
  r.text = "abcdef";
  r.coarse_spans = {{0, 2, "COM"}};
  r.diff_positions = {2};
  r.status = status;
  r.corrected_spans = std::move(corrected);
  return r;
}

TEST_CASE("a model that agrees with the coarse layer selects nothing") {
  Dataset d = Coarse({{"abcdef", {{0, 2, "COM"}}}, {"xyz", {}}});
  CrfModel model = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  // An untrained model predicts O everywhere.
  Dataset empty = Coarse({{"abcdef", {}}, {"xyz", {}}});
  CHECK(SelectDisagreements(model, empty).empty());

  std::vector<DisagreementRecord> rs = SelectDisagreements(model, d);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].sentence_id == "s0");
  CHECK(rs[0].diff_positions == std::vector<int>{0, 1});
  CHECK(rs[0].predicted_spans.empty());
  CHECK(rs[0].status == RecordStatus::kPending);
}

TEST_CASE("selection orders by diff size then id") {
  Dataset d = Coarse({{"abcdef", {{0, 1, "COM"}}},
                      {"abcdef", {{0, 4, "COM"}}},
                      {"abcdef", {{2, 3, "COM"}}},
                      {"abcdef", {}}});
  CrfModel model = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  std::vector<DisagreementRecord> rs = SelectDisagreements(model, d, "coarse", 3);
  REQUIRE(rs.size() == 3);
  CHECK(rs[0].sentence_id == "s1");
  CHECK(rs[1].sentence_id == "s0");
  CHECK(rs[2].sentence_id == "s2");
}

TEST_CASE("applying corrections") {
  Dataset d = Coarse({{"abcdef", {{0, 2, "COM"}}}, {"abcdef", {}}, {"abcdef", {{3, 5, "COM"}}}});
  Dataset out = ApplyCorrections(
      d, {Record("s2", RecordStatus::kSkipped), Record("s0", RecordStatus::kCorrected, SpanList{{0, 3, "COM"}})});
  REQUIRE(out.size() == 2);
  CHECK(out.sentence(0).id == "s0");
  CHECK(out.layer("corrected")[0] == SpanList{{0, 3, "COM"}});
  CHECK(out.layer("corrected")[1] == SpanList{{3, 5, "COM"}});

  Dataset skipped = ApplyCorrections(d, {Record("s1", RecordStatus::kSkipped)});
  CHECK(skipped.layer("corrected")[0].empty());
  CHECK(ApplyCorrections(d, {}).empty());

  CHECK(CodeOf([&] { ApplyCorrections(d, {Record("s0", RecordStatus::kPending)}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] { ApplyCorrections(d, {Record("nope", RecordStatus::kSkipped)}); }) ==
        ErrorCode::kUnknownSentence);
  CHECK(CodeOf([&] {
          ApplyCorrections(d, {Record("s0", RecordStatus::kCorrected, SpanList{{4, 9, "COM"}})});
        }) == ErrorCode::kRange);
}

TEST_CASE("oracle correction copies gold") {
  Dataset gold = Coarse({{"abcdef", {}}});
  gold.SetLayer("gold", {{{1, 4, "COM"}}});
  std::vector<DisagreementRecord> rs = {Record("s0", RecordStatus::kPending)};
  OracleCorrect(gold, &rs);
  CHECK(rs[0].status == RecordStatus::kCorrected);
  CHECK(rs[0].corrected_spans == SpanList{{1, 4, "COM"}});
  CHECK(rs[0].annotator_id == "oracle");
  std::vector<DisagreementRecord> unknown = {Record("x", RecordStatus::kPending)};
  CHECK(CodeOf([&] { OracleCorrect(gold, &unknown); }) == ErrorCode::kUnknownSentence);
}

TEST_CASE("export uses the latest non-pending record per sentence") {
  testing::TempDir dir;
  const std::string path = dir.Path("store.jsonl");
  DisagreementStore::Create(path, {Record("a", RecordStatus::kPending), Record("b", RecordStatus::kPending)});
  std::vector<std::string> warnings;
  CHECK(ExportCorrected(path, &warnings).empty());
  CHECK(warnings.size() == 1);

  {
    DisagreementStore s = DisagreementStore::Open(path);
    s.Append(Record("a", RecordStatus::kCorrected, SpanList{{0, 1, "COM"}}));
    s.Append(Record("a", RecordStatus::kCorrected, SpanList{{1, 5, "COM"}}));
  }
  warnings.clear();
  Dataset out = ExportCorrected(path, &warnings);
  CHECK(warnings.empty());
  REQUIRE(out.size() == 1);
  CHECK(out.sentence(0).id == "a");
  CHECK(out.sentence(0).text == "abcdef");
  CHECK(out.layer("corrected")[0] == SpanList{{1, 5, "COM"}});
  CHECK(CodeOf([&] { ExportCorrected(dir.Path("missing")); }) == ErrorCode::kIo);
}

Dataset Labeled(int n, uint64_t seed) {
  SynthConfig c = SynthConfig::Defaults();
  c.n_sentences = n;
  c.n_names = 40;
  c.n_unlabeled = 20;
  c.seed = seed;
  return GenerateCorpus(c).train;
}

TEST_CASE("detail training edge cases") {
  Dataset train = Labeled(200, 2);
  ModelSpec spec;
  spec.emitter.hash_bits = 14;
  TrainConfig config;
  config.max_epochs = 2;
  CrfModel outline = OutlineTrain(train, train, spec, config, nullptr, "gold");

  std::vector<std::string> warnings;
  CrfModel same = DetailTrain(outline, Dataset{}, train, config, nullptr, &warnings);
  CHECK(warnings.size() == 1);
  CHECK(SerializeModel(same) == SerializeModel(outline));

  Dataset corrected = train;
  corrected.SetLayer("corrected", train.layer("gold"));
  TrainConfig frozen = config;
  frozen.learning_rate = 0;
  CrfModel frozen_model = DetailTrain(outline, corrected, train, frozen);
  CHECK(DecodeBatch(frozen_model, train) == DecodeBatch(outline, train));

  CHECK(CodeOf([&] { OutlineTrain(Dataset{}, train, spec, config); }) == ErrorCode::kData);
}

TEST_CASE("distillation skips long sentences and needs data") {
  Dataset unlabeled;
  unlabeled.AddSentence(Sentence::Make("short", "平安银行"));
  unlabeled.AddSentence(Sentence::Make("long", std::string(30, 'x')));
  CrfModel teacher = CrfModel::Create(LabelScheme(), StudentEmitterConfig());
  DistillStats stats;
  Dataset pseudo = Distill(teacher, unlabeled, 10, 1, &stats);
  CHECK(stats.labeled == 1);
  CHECK(stats.skipped == 1);
  REQUIRE(pseudo.size() == 1);
  CHECK(pseudo.HasLayer("pseudo"));
  CHECK(pseudo.layer("pseudo")[0] == teacher.Predict(pseudo.sentence(0)));

  CHECK(Distill(teacher, Dataset{}).empty());
  ModelSpec spec{{"COM"}, true, StudentEmitterConfig()};
  CHECK(CodeOf([&] { TrainStudent(Distill(teacher, Dataset{}), pseudo, spec, TrainConfig{}); }) ==
        ErrorCode::kData);
}

PipelineConfig SmallRun(const std::string& work_dir) {
  PipelineConfig c = PipelineConfig::Defaults();
  c.work_dir = work_dir;
  c.synth.n_sentences = 400;
  c.synth.n_names = 60;
  c.synth.n_unlabeled = 100;
  c.teacher.emitter.hash_bits = 16;
  c.outline.max_epochs = 3;
  c.detail.max_epochs = 3;
  c.student_train.max_epochs = 3;
  c.bench = false;
  return c;
}

std::map<std::string, std::string> Files(const std::string& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = ReadFile(e.path().string());
  }
  return out;
}

TEST_CASE("a resumed run writes the same files as an uninterrupted one") {
  testing::TempDir dir;
  PipelineConfig whole = SmallRun(dir.Path("whole"));
  PipelineState done = RunPipeline(whole);
  CHECK(done.stage == Stage::kDone);
  CHECK(done.metrics["test"].contains("student"));

  PipelineConfig parts = SmallRun(dir.Path("parts"));
  int calls = 0;
  for (Stage s : {Stage::kOutline, Stage::kSelecting, Stage::kCorrecting, Stage::kDetail,
                  Stage::kDistilling}) {
    RunOptions o;
    o.stop_after = s;
    PipelineState st = RunPipeline(parts, o);
    CHECK(st.stage == static_cast<Stage>(static_cast<int>(s) + 1));
    ++calls;
  }
  CHECK(calls == 5);
  CHECK(Files(whole.work_dir) == Files(parts.work_dir));

  // Rerunning a finished pipeline changes nothing.
  RunPipeline(parts);
  CHECK(Files(whole.work_dir) == Files(parts.work_dir));

  fs::remove(parts.work_dir + "/coarse.jsonl");
  CHECK(CodeOf([&] { RunPipeline(parts); }) == ErrorCode::kData);
}

TEST_CASE("store mode waits for reviews") {
  testing::TempDir dir;
  PipelineConfig c = SmallRun(dir.Path("run"));
  c.correction_mode = "store";
  PipelineState st = RunPipeline(c);
  REQUIRE(st.stage == Stage::kCorrecting);
  const std::string store_path = c.work_dir + "/records.jsonl";
  CHECK(RunPipeline(c).stage == Stage::kCorrecting);

  DisagreementStore store = DisagreementStore::Open(store_path);
  std::vector<DisagreementRecord> rs = store.Snapshot();
  REQUIRE_FALSE(rs.empty());
  for (auto& r : rs) {
    r.status = RecordStatus::kSkipped;
    r.annotator_id = "tester";
  }
  store.AppendAll(rs);
  st = RunPipeline(c);
  CHECK(st.stage == Stage::kDone);
  CHECK(st.metrics["correcting"]["skipped"] == rs.size());
}

TEST_CASE("pipeline config json") {
  PipelineConfig c = SmallRun("w");
  CHECK(PipelineConfig::FromJson(nlohmann::json::parse(c.ToJson().dump())).ToJson() == c.ToJson());
  CHECK(CodeOf([] { PipelineConfig::FromJson({{"threads", 0}}).Validate(); }) == ErrorCode::kConfig);
  CHECK(CodeOf([] { PipelineConfig::FromJson({{"correction", {{"mode", "magic"}}}}).Validate(); }) ==
        ErrorCode::kConfig);
  for (Stage s : {Stage::kOutline, Stage::kSelecting, Stage::kCorrecting, Stage::kDetail,
                  Stage::kDistilling, Stage::kDone}) {
    CHECK(ParseStage(StageName(s)) == s);
  }
}

}  // namespace
}  // namespace nerpipe
