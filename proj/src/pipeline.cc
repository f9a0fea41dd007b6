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

#include "pipeline.h"

#include <algorithm>
#include <map>
#include <set>

#include "eval.h"
#include "gazetteer.h"
#include "status.h"
#include "util.h"

namespace nerpipe {

namespace {

std::vector<SpanList> DecodeSpans(const CrfModel& model, const Dataset& dataset,
                                  int threads) {
  std::vector<TagSequence> tags = DecodeBatch(model, dataset, threads);
  std::vector<SpanList> spans(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    spans[i] = TagsToSpans(tags[i], model.scheme());
  }
  return spans;
}

nlohmann::ordered_json HistoryJson(const FitResult& r) {
  return {{"dev_f1", r.dev_f1},
          {"train_loss", r.train_loss},
          {"best_epoch", r.best_epoch},
          {"stopped_early", r.stopped_early}};
}

nlohmann::ordered_json MetricsJson(const EntityMetrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"true_positives", m.true_positives},
          {"false_positives", m.false_positives},
          {"false_negatives", m.false_negatives}};
}

}  // namespace

CrfModel OutlineTrain(const Dataset& coarse, const Dataset& dev,
                      const ModelSpec& spec, const TrainConfig& config,
                      FitResult* history, const std::string& layer) {
  if (coarse.empty()) throw Error(ErrorCode::kData, "coarse dataset is empty");
  coarse.layer(layer);
  CrfModel model = CrfModel::Create(LabelScheme(spec.labels), spec.emitter,
                                    spec.constrained);
  model.set_train_seed(config.seed);
  FitData data;
  data.train = &coarse;
  data.train_layer = layer;
  data.dev = &dev;
  FitResult result = Fit(&model, data, config);
  if (history != nullptr) *history = result;
  return model;
}

std::vector<DisagreementRecord> SelectDisagreements(const CrfModel& model,
                                                    const Dataset& coarse,
                                                    const std::string& layer,
                                                    int threads) {
  const auto& spans = coarse.layer(layer);
  std::vector<TagSequence> predicted = DecodeBatch(model, coarse, threads);
  std::vector<DisagreementRecord> records;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const Sentence& s = coarse.sentence(i);
    TagSequence expected = SpansToTags(s.length(), spans[i], model.scheme());
    DisagreementRecord r;
    for (std::size_t k = 0; k < expected.size(); ++k) {
      if (expected[k] != predicted[i][k]) r.diff_positions.push_back(static_cast<int>(k));
    }
    if (r.diff_positions.empty()) continue;
    r.sentence_id = s.id;
    r.text = s.text;
    r.coarse_spans = spans[i];
    r.predicted_spans = TagsToSpans(predicted[i], model.scheme());
    records.push_back(std::move(r));
  }
  SortRecords(&records);
  return records;
}

void OracleCorrect(const Dataset& gold, std::vector<DisagreementRecord>* records,
                   const std::string& gold_layer,
                   const std::string& annotator_id) {
  const auto& spans = gold.layer(gold_layer);
  for (DisagreementRecord& r : *records) {
    auto index = gold.Find(r.sentence_id);
    if (!index) {
      throw Error(ErrorCode::kUnknownSentence,
                  "no gold annotation for sentence " + r.sentence_id);
    }
    r.status = RecordStatus::kCorrected;
    r.corrected_spans = spans[*index];
    r.annotator_id = annotator_id;
  }
}

Dataset ApplyCorrections(const Dataset& coarse,
                         const std::vector<DisagreementRecord>& records,
                         const std::string& layer) {
  const auto& spans = coarse.layer(layer);
  std::map<std::size_t, const DisagreementRecord*> chosen;
  for (const DisagreementRecord& r : records) {
    if (r.status == RecordStatus::kPending) {
      throw Error(ErrorCode::kInvalidArgument,
                  "record " + r.sentence_id + " is still pending");
    }
    auto index = coarse.Find(r.sentence_id);
    if (!index) {
      throw Error(ErrorCode::kUnknownSentence,
                  "record references unknown sentence " + r.sentence_id);
    }
    chosen[*index] = &r;
  }
  Dataset out;
  std::vector<SpanList> corrected;
  for (const auto& [index, record] : chosen) {
    const Sentence& s = coarse.sentence(index);
    SpanList result = record->status == RecordStatus::kCorrected
                          ? *record->corrected_spans
                          : spans[index];
    ValidateSpans(s.length(), result);
    out.AddSentence(s);
    corrected.push_back(std::move(result));
  }
  out.SetLayer("corrected", std::move(corrected));
  return out;
}

Dataset ExportCorrected(const std::string& store_path,
                        std::vector<std::string>* warnings) {
  if (!FileExists(store_path)) {
    throw Error(ErrorCode::kIo, "store not found: " + store_path);
  }
  StoreReplay replay = ReplayStore(ReadFile(store_path));
  Dataset source;
  std::vector<SpanList> coarse;
  std::vector<DisagreementRecord> done;
  for (const DisagreementRecord& r : replay.records) {
    if (r.status == RecordStatus::kPending) continue;
    source.AddSentence(Sentence::Make(r.sentence_id, r.text));
    coarse.push_back(r.coarse_spans);
    done.push_back(r);
  }
  source.SetLayer("coarse", std::move(coarse));
  if (done.empty() && warnings != nullptr) {
    warnings->push_back("store has no corrected or skipped records");
  }
  if (replay.torn_tail && warnings != nullptr) {
    warnings->push_back("ignored a torn final line in " + store_path);
  }
  return ApplyCorrections(source, done);
}

CrfModel DetailTrain(const CrfModel& model, const Dataset& corrected,
                     const Dataset& dev, const TrainConfig& config,
                     FitResult* history, std::vector<std::string>* warnings,
                     const std::string& layer) {
  CrfModel out = model;
  if (corrected.empty()) {
    if (warnings != nullptr) {
      warnings->push_back("corrected dataset is empty; detail model equals outline model");
    }
    if (history != nullptr) *history = FitResult{};
    return out;
  }
  FitData data;
  data.train = &corrected;
  data.train_layer = layer;
  data.dev = &dev;
  FitResult result = Fit(&out, data, config);
  if (history != nullptr) *history = result;
  return out;
}

Dataset Distill(const CrfModel& teacher, const Dataset& unlabeled,
                std::size_t max_len, int threads, DistillStats* stats) {
  Dataset kept;
  for (const Sentence& s : unlabeled.sentences()) {
    if (s.length() <= max_len) kept.AddSentence(s);
  }
  DistillStats local;
  local.labeled = kept.size();
  local.skipped = unlabeled.size() - kept.size();
  kept.SetLayer("pseudo", DecodeSpans(teacher, kept, threads));
  if (stats != nullptr) *stats = local;
  return kept;
}

CrfModel TrainStudent(const Dataset& pseudo, const Dataset& dev,
                      const ModelSpec& spec, const TrainConfig& config,
                      FitResult* history) {
  if (pseudo.empty()) throw Error(ErrorCode::kData, "pseudo-labeled dataset is empty");
  return OutlineTrain(pseudo, dev, spec, config, history, "pseudo");
}

// ---------------------------------------------------------------------------

namespace {

constexpr Stage kStages[] = {Stage::kOutline,   Stage::kSelecting,
                             Stage::kCorrecting, Stage::kDetail,
                             Stage::kDistilling, Stage::kDone};

nlohmann::ordered_json TrainJson(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"l2", c.l2},
          {"decay", c.decay},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience}};
}

void ReadTrain(const nlohmann::json& j, TrainConfig* c) {
  c->learning_rate = j.value("learning_rate", c->learning_rate);
  c->l2 = j.value("l2", c->l2);
  c->decay = j.value("decay", c->decay);
  c->max_epochs = j.value("max_epochs", c->max_epochs);
  c->patience = j.value("patience", c->patience);
}

nlohmann::ordered_json SpecJson(const ModelSpec& s) {
  return {{"labels", s.labels},
          {"constrained", s.constrained},
          {"window", s.emitter.window},
          {"hash_bits", s.emitter.hash_bits},
          {"hash_seed", s.emitter.hash_seed}};
}

void ReadSpec(const nlohmann::json& j, ModelSpec* s) {
  if (j.contains("labels")) s->labels = j.at("labels").get<std::vector<std::string>>();
  s->constrained = j.value("constrained", s->constrained);
  s->emitter.window = j.value("window", s->emitter.window);
  s->emitter.hash_bits = j.value("hash_bits", s->emitter.hash_bits);
  s->emitter.hash_seed = j.value("hash_seed", s->emitter.hash_seed);
}

}  // namespace

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kOutline:
      return "outline";
    case Stage::kSelecting:
      return "selecting";
    case Stage::kCorrecting:
      return "correcting";
    case Stage::kDetail:
      return "detail";
    case Stage::kDistilling:
      return "distilling";
    case Stage::kDone:
      return "done";
  }
  return "outline";
}

Stage ParseStage(std::string_view name) {
  for (Stage s : kStages) {
    if (StageName(s) == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown stage '" + std::string(name) + "'");
}

PipelineConfig PipelineConfig::Defaults() {
  PipelineConfig c;
  c.detail.learning_rate = c.outline.learning_rate * 0.1;
  return c;
}

PipelineConfig PipelineConfig::FromJson(const nlohmann::json& j) {
  PipelineConfig c = Defaults();
  try {
    c.work_dir = j.value("work_dir", c.work_dir);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.synth.seed = c.seed;
    if (j.contains("data")) {
      const auto& d = j.at("data");
      c.use_synth = false;
      c.train_path = d.value("train", "");
      c.dev_path = d.value("dev", "");
      c.test_path = d.value("test", "");
      c.unlabeled_path = d.value("unlabeled", "");
      c.dict_path = d.value("dict", "");
    }
    if (j.contains("synth")) {
      nlohmann::json s = j.at("synth");
      if (!s.contains("seed")) s["seed"] = c.seed;
      c.synth = SynthConfig::FromJson(s);
      c.use_synth = true;
    }
    if (j.contains("teacher")) ReadSpec(j.at("teacher"), &c.teacher);
    if (j.contains("student")) ReadSpec(j.at("student"), &c.student);
    if (j.contains("outline")) ReadTrain(j.at("outline"), &c.outline);
    c.detail.learning_rate = c.outline.learning_rate * 0.1;
    c.detail.l2 = c.outline.l2;
    if (j.contains("detail")) ReadTrain(j.at("detail"), &c.detail);
    if (j.contains("student_train")) ReadTrain(j.at("student_train"), &c.student_train);
    if (j.contains("correction")) {
      const auto& k = j.at("correction");
      c.correction_mode = k.value("mode", c.correction_mode);
      c.allow_pending = k.value("allow_pending", c.allow_pending);
    }
    c.distill_max_len = j.value("distill_max_len", c.distill_max_len);
    c.bench = j.value("bench", c.bench);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("pipeline config: ") + e.what());
  }
  c.Validate();
  return c;
}

nlohmann::ordered_json PipelineConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["work_dir"] = work_dir;
  j["seed"] = seed;
  j["threads"] = threads;
  if (use_synth) {
    j["synth"] = synth.ToJson();
  } else {
    j["data"] = {{"train", train_path}, {"dev", dev_path}, {"test", test_path},
                 {"unlabeled", unlabeled_path}, {"dict", dict_path}};
  }
  j["teacher"] = SpecJson(teacher);
  j["student"] = SpecJson(student);
  j["outline"] = TrainJson(outline);
  j["detail"] = TrainJson(detail);
  j["student_train"] = TrainJson(student_train);
  j["correction"] = {{"mode", correction_mode}, {"allow_pending", allow_pending}};
  j["distill_max_len"] = distill_max_len;
  j["bench"] = bench;
  return j;
}

void PipelineConfig::Validate() const {
  if (work_dir.empty()) throw Error(ErrorCode::kConfig, "work_dir is empty");
  if (threads < 1) throw Error(ErrorCode::kConfig, "threads must be >= 1");
  if (correction_mode != "oracle" && correction_mode != "store") {
    throw Error(ErrorCode::kConfig,
                "correction.mode must be 'oracle' or 'store', got '" +
                    correction_mode + "'");
  }
  if (use_synth) {
    synth.Validate();
  } else if (train_path.empty() || dev_path.empty()) {
    throw Error(ErrorCode::kConfig, "data.train and data.dev are required");
  }
  outline.Validate();
  detail.Validate();
  student_train.Validate();
  LabelScheme check_teacher(teacher.labels);
  LabelScheme check_student(student.labels);
  if (teacher.labels != student.labels) {
    throw Error(ErrorCode::kConfig, "teacher and student label sets differ");
  }
}

nlohmann::ordered_json PipelineState::ToJson() const {
  nlohmann::ordered_json j;
  j["stage"] = StageName(stage);
  j["artifacts"] = artifacts;
  j["metrics"] = metrics;
  j["warnings"] = warnings;
  return j;
}

PipelineState PipelineState::FromJson(const nlohmann::ordered_json& j) {
  PipelineState s;
  try {
    s.stage = ParseStage(j.at("stage").get<std::string>());
    s.artifacts = j.value("artifacts", nlohmann::ordered_json::object());
    s.metrics = j.value("metrics", nlohmann::ordered_json::object());
    s.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("pipeline state: ") + e.what());
  }
  return s;
}

std::string StatePath(const PipelineConfig& config) {
  return config.work_dir + "/pipeline_state.json";
}

PipelineState LoadState(const std::string& path) {
  if (!FileExists(path)) return PipelineState{};
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  return PipelineState::FromJson(j);
}

void SaveState(const PipelineState& state, const std::string& path) {
  AtomicWriteFile(path, state.ToJson().dump(2) + "\n");
}

namespace {

class Runner {
 public:
  Runner(const PipelineConfig& config, const RunOptions& options)
      : config_(config), options_(options), state_path_(StatePath(config)) {}

  PipelineState Run() {
    MakeDirs(config_.work_dir + "/models");
    state_ = LoadState(state_path_);
    CheckArtifacts();
    while (state_.stage != Stage::kDone) {
      const Stage current = state_.stage;
      bool advanced = false;
      switch (current) {
        case Stage::kOutline:
          advanced = Outline();
          break;
        case Stage::kSelecting:
          advanced = Select();
          break;
        case Stage::kCorrecting:
          advanced = Correct();
          break;
        case Stage::kDetail:
          advanced = Detail();
          break;
        case Stage::kDistilling:
          advanced = Distilling();
          break;
        case Stage::kDone:
          break;
      }
      if (!advanced) break;
      state_.stage = static_cast<Stage>(static_cast<int>(current) + 1);
      SaveState(state_, state_path_);
      Log("completed " + std::string(StageName(current)));
      if (options_.stop_after && *options_.stop_after == current) break;
    }
    return state_;
  }

 private:
  std::string Path(const std::string& rel) const {
    return config_.work_dir + "/" + rel;
  }

  void Log(const std::string& line) const {
    if (options_.log) options_.log(line);
  }

  void Record(const std::string& name, const std::string& rel) {
    state_.artifacts[name] = {{"path", rel}, {"crc32", Crc32Hex(ReadFile(Path(rel)))}};
  }

  void CheckArtifacts() const {
    for (const auto& [name, entry] : state_.artifacts.items()) {
      const std::string rel = entry.at("path").get<std::string>();
      if (!FileExists(Path(rel))) {
        throw Error(ErrorCode::kData,
                    "pipeline state references missing artifact " + name + " (" +
                        rel + ")");
      }
    }
  }

  Dataset LoadJsonl(const std::string& path) const {
    return LoadDataset(path, DatasetFormat::kJsonl);
  }

  std::string Artifact(const std::string& name) const {
    return Path(state_.artifacts.at(name).at("path").get<std::string>());
  }

  TrainConfig Seeded(TrainConfig c) const {
    c.seed = config_.seed;
    return c;
  }

  bool Outline() {
    std::string train_path, dev_path, test_path, unlabeled_path, dict_path;
    if (config_.use_synth) {
      SynthCorpus corpus = GenerateCorpus(config_.synth);
      WriteCorpus(corpus, config_.synth, Path("data"));
      for (const char* f : {"train", "dev", "test", "unlabeled"}) {
        Record(std::string(f), std::string("data/") + f + ".jsonl");
      }
      Record("dict", "data/dict.txt");
      Log("generated synthetic corpus in " + Path("data"));
    } else {
      auto import = [&](const std::string& name, const std::string& src) {
        if (src.empty()) return;
        Dataset d = LoadJsonl(src);
        SaveDataset(d, Path("data/" + name + ".jsonl"), DatasetFormat::kJsonl);
        Record(name, "data/" + name + ".jsonl");
      };
      MakeDirs(Path("data"));
      import("train", config_.train_path);
      import("dev", config_.dev_path);
      import("test", config_.test_path);
      import("unlabeled", config_.unlabeled_path);
      if (!config_.dict_path.empty()) {
        AtomicWriteFile(Path("data/dict.txt"), ReadFile(config_.dict_path));
        Record("dict", "data/dict.txt");
      }
    }

    Dataset train = LoadJsonl(Artifact("train"));
    if (!train.HasLayer("coarse")) {
      if (!state_.artifacts.contains("dict")) {
        throw Error(ErrorCode::kData,
                    "train set has no coarse layer and no dictionary was given");
      }
      NameDictionary dict = LoadDictionary(Artifact("dict"));
      AnnotateStats stats;
      train = AnnotateCorpus(train, Matcher::Build(dict), nullptr, &stats);
      for (auto& w : stats.warnings) state_.warnings.push_back(w);
    }
    SaveDataset(train, Path("coarse.jsonl"), DatasetFormat::kJsonl);
    Record("coarse", "coarse.jsonl");

    Dataset coarse = LoadJsonl(Artifact("coarse"));
    Dataset dev = LoadJsonl(Artifact("dev"));
    FitResult history;
    CrfModel model = OutlineTrain(coarse, dev, config_.teacher,
                                  Seeded(config_.outline), &history);
    SaveModel(model, Path("models/outline.nermodel"));
    Record("outline_model", "models/outline.nermodel");
    state_.metrics["outline"] = HistoryJson(history);
    return true;
  }

  bool Select() {
    CrfModel model = LoadModel(Artifact("outline_model"));
    Dataset coarse = LoadJsonl(Artifact("coarse"));
    std::vector<DisagreementRecord> records =
        SelectDisagreements(model, coarse, "coarse", config_.threads);
    DisagreementStore::Create(Path("records.jsonl"), records);
    Record("records", "records.jsonl");
    state_.metrics["selecting"] = {{"records", records.size()},
                                   {"sentences", coarse.size()}};
    Log("selected " + std::to_string(records.size()) + " disagreement records");
    return true;
  }

  bool Correct() {
    DisagreementStore store = DisagreementStore::Open(Artifact("records"));
    std::vector<DisagreementRecord> records = store.Snapshot();
    std::size_t pending = 0;
    for (const auto& r : records) pending += r.status == RecordStatus::kPending;
    if (config_.correction_mode == "oracle" && pending > 0) {
      Dataset gold = LoadJsonl(Artifact("coarse"));
      std::vector<DisagreementRecord> todo;
      for (const auto& r : records) {
        if (r.status == RecordStatus::kPending) todo.push_back(r);
      }
      OracleCorrect(gold, &todo);
      store.AppendAll(todo);
      pending = 0;
    } else if (pending > 0 && !config_.allow_pending) {
      Log(std::to_string(pending) + " records await review in " +
          Artifact("records"));
      return false;
    }
    std::vector<std::string> warnings;
    Dataset corrected = ExportCorrected(Artifact("records"), &warnings);
    for (auto& w : warnings) state_.warnings.push_back(w);
    SaveDataset(corrected, Path("corrected.jsonl"), DatasetFormat::kJsonl);
    Record("records", "records.jsonl");
    Record("corrected", "corrected.jsonl");
    std::size_t n_corrected = 0, n_skipped = 0;
    for (const auto& r : store.Snapshot()) {
      n_corrected += r.status == RecordStatus::kCorrected;
      n_skipped += r.status == RecordStatus::kSkipped;
    }
    state_.metrics["correcting"] = {{"corrected", n_corrected},
                                    {"skipped", n_skipped},
                                    {"left_pending", pending},
                                    {"dataset_sentences", corrected.size()}};
    return true;
  }

  bool Detail() {
    CrfModel outline = LoadModel(Artifact("outline_model"));
    Dataset corrected = LoadJsonl(Artifact("corrected"));
    Dataset dev = LoadJsonl(Artifact("dev"));
    FitResult history;
    CrfModel detail = DetailTrain(outline, corrected, dev, Seeded(config_.detail),
                                  &history, &state_.warnings);
    SaveModel(detail, Path("models/detail.nermodel"));
    Record("detail_model", "models/detail.nermodel");
    state_.metrics["detail"] = HistoryJson(history);
    return true;
  }

  bool Distilling() {
    CrfModel teacher = LoadModel(Artifact("detail_model"));
    Dataset unlabeled;
    if (state_.artifacts.contains("unlabeled")) {
      unlabeled = LoadJsonl(Artifact("unlabeled"));
    } else {
      for (const Sentence& s : LoadJsonl(Artifact("train")).sentences()) {
        unlabeled.AddSentence(s);
      }
    }
    DistillStats stats;
    Dataset pseudo = Distill(teacher, unlabeled, config_.distill_max_len,
                             config_.threads, &stats);
    SaveDataset(pseudo, Path("pseudo.jsonl"), DatasetFormat::kJsonl);
    Record("pseudo", "pseudo.jsonl");

    Dataset dev = LoadJsonl(Artifact("dev"));
    FitResult history;
    CrfModel student = TrainStudent(LoadJsonl(Artifact("pseudo")), dev,
                                    config_.student, Seeded(config_.student_train),
                                    &history);
    SaveModel(student, Path("models/student.nermodel"));
    Record("student_model", "models/student.nermodel");
    state_.metrics["distilling"] = HistoryJson(history);
    state_.metrics["distilling"]["pseudo_sentences"] = stats.labeled;
    state_.metrics["distilling"]["skipped_over_length"] = stats.skipped;

    if (state_.artifacts.contains("test")) Evaluate();
    return true;
  }

  void Evaluate() {
    Dataset test = LoadJsonl(Artifact("test"));
    const std::vector<SpanList>& gold = test.layer("gold");
    nlohmann::ordered_json metrics;
    std::vector<RunRecord> runs;
    auto add = [&](const std::string& name, const std::vector<SpanList>& predicted) {
      RunRecord r;
      r.name = name;
      r.metrics = EntityPrf(predicted, gold);
      metrics[name] = MetricsJson(r.metrics);
      runs.push_back(r);
    };
    if (state_.artifacts.contains("dict")) {
      NameDictionary dict = LoadDictionary(Artifact("dict"));
      std::vector<SpanList> spans(test.size());
      if (!dict.empty()) {
        Matcher matcher = Matcher::Build(dict);
        for (std::size_t i = 0; i < test.size(); ++i) {
          spans[i] = matcher.Match(test.sentence(i).chars);
        }
      }
      add("gazetteer", spans);
    }
    std::map<std::string, CrfModel> models;
    for (const char* name : {"outline", "detail", "student"}) {
      models.emplace(name, LoadModel(Artifact(std::string(name) + "_model")));
      add(name, DecodeSpans(models.at(name), test, config_.threads));
    }
    AtomicWriteFile(Path("metrics.json"), metrics.dump(2) + "\n");
    Record("metrics", "metrics.json");
    state_.metrics["test"] = metrics;

    if (config_.bench) {
      // Timings vary run to run; they live outside the state file.
      nlohmann::ordered_json bench;
      for (RunRecord& r : runs) {
        auto it = models.find(r.name);
        if (it == models.end()) continue;
        BenchReport b = ThroughputBench(it->second, test, 1, config_.threads, r.name);
        r.sentences_per_second = b.sentences_per_second;
        r.characters_per_second = b.characters_per_second;
        bench[r.name] = {{"sentences_per_second", b.sentences_per_second},
                         {"characters_per_second", b.characters_per_second},
                         {"wall_time_seconds", b.wall_time_seconds}};
      }
      AtomicWriteFile(Path("bench.json"), bench.dump(2) + "\n");
      AtomicWriteFile(Path("report.jsonl"), CompareReport(runs).jsonl);
    }
  }

  const PipelineConfig& config_;
  const RunOptions& options_;
  const std::string state_path_;
  PipelineState state_;
};

}  // namespace

PipelineState RunPipeline(const PipelineConfig& config, const RunOptions& options) {
  config.Validate();
  return Runner(config, options).Run();
}

}  // namespace nerpipe
