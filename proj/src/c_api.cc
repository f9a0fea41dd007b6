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

#include "nerpipe/nerpipe.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <set>
#include <string>

#include "corpus.h"
#include "crf.h"
#include "eval.h"
#include "gazetteer.h"
#include "json.hpp"
#include "pipeline.h"
#include "records.h"
#include "review_server.h"
#include "status.h"
#include "synth.h"
#include "util.h"

using nerpipe::Error;
using nerpipe::ErrorCode;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct ner_model {
  nerpipe::CrfModel rep;
};

struct ner_dataset {
  nerpipe::Dataset rep;
};

struct ner_matcher {
  nerpipe::Matcher rep;
};

struct ner_review_server {
  std::unique_ptr<nerpipe::ReviewServer> rep;
};

namespace {

thread_local std::string last_message;
thread_local long last_line = 0;

ner_status Fail(ErrorCode code, const std::string& message, long line = 0) {
  last_message = message;
  last_line = line;
  return static_cast<ner_status>(code);
}

template <typename Fn>
ner_status Guard(Fn&& fn) {
  try {
    fn();
    return NER_OK;
  } catch (const Error& e) {
    return Fail(e.code(), e.what(), e.line().value_or(0));
  } catch (const json::exception& e) {
    return Fail(ErrorCode::kParse, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(ErrorCode::kInternal, "out of memory");
  } catch (const std::exception& e) {
    return Fail(ErrorCode::kInternal, e.what());
  } catch (...) {
    return Fail(ErrorCode::kInternal, "unknown exception");
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void Emit(char** out, const ojson& value) {
  if (out != nullptr) *out = CopyString(value.dump());
}

json ParseOptions(const char* text, const std::set<std::string>& allowed) {
  if (text == nullptr || *text == '\0') return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("options: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "options must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (allowed.count(key) == 0) {
      throw Error(ErrorCode::kConfig, "unknown option '" + key + "'");
    }
  }
  return j;
}

template <typename T>
T Get(const json& j, const char* key, T fallback) {
  try {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("option ") + key + ": " + e.what());
  }
}

std::string Str(const char* s, const char* fallback = "") {
  return s != nullptr && *s != '\0' ? std::string(s) : std::string(fallback);
}

const std::set<std::string> kTrainKeys = {
    "learning_rate", "l2",        "decay",     "max_epochs",  "patience",
    "seed",          "labels",    "constrained", "window",    "hash_bits",
    "hash_seed",     "train_layer", "dev_layer"};

nerpipe::TrainConfig TrainFrom(const json& j, double default_lr) {
  nerpipe::TrainConfig c;
  c.learning_rate = Get(j, "learning_rate", default_lr);
  c.l2 = Get(j, "l2", c.l2);
  c.decay = Get(j, "decay", c.decay);
  c.max_epochs = Get(j, "max_epochs", c.max_epochs);
  c.patience = Get(j, "patience", c.patience);
  c.seed = Get<uint64_t>(j, "seed", c.seed);
  c.Validate();
  return c;
}

nerpipe::ModelSpec SpecFrom(const json& j, nerpipe::EmitterConfig emitter) {
  nerpipe::ModelSpec s;
  s.labels = Get(j, "labels", s.labels);
  s.constrained = Get(j, "constrained", s.constrained);
  s.emitter = emitter;
  s.emitter.window = Get(j, "window", s.emitter.window);
  s.emitter.hash_bits = Get(j, "hash_bits", s.emitter.hash_bits);
  s.emitter.hash_seed = Get<uint64_t>(j, "hash_seed", s.emitter.hash_seed);
  return s;
}

ojson History(const nerpipe::FitResult& r) {
  return {{"dev_f1", r.dev_f1},
          {"train_loss", r.train_loss},
          {"best_epoch", r.best_epoch},
          {"stopped_early", r.stopped_early}};
}

nerpipe::Dataset Jsonl(const std::string& path) {
  return nerpipe::LoadDataset(path, nerpipe::DatasetFormat::kJsonl);
}

// Rebuilds `dev` with only its `dev_layer`, renamed to "gold", so Fit can use
// a default dev layer name.
nerpipe::Dataset DevWithGold(const std::string& path, const std::string& layer) {
  nerpipe::Dataset dev = Jsonl(path);
  if (layer != "gold") {
    std::vector<nerpipe::SpanList> spans = dev.layer(layer);
    dev.SetLayer("gold", std::move(spans));
  }
  return dev;
}

ojson MetricsJson(const nerpipe::EntityMetrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"true_positives", m.true_positives},
          {"false_positives", m.false_positives},
          {"false_negatives", m.false_negatives}};
}

}  // namespace

extern "C" {

const char* ner_version(void) { return NER_VERSION_STRING; }

uint32_t ner_model_format_version(void) { return nerpipe::kModelFormatVersion; }

const char* ner_status_name(ner_status status) {
  if (status == NER_OK) return "OK";
  return nerpipe::ErrorName(static_cast<ErrorCode>(status));
}

const char* ner_last_error_message(void) { return last_message.c_str(); }

long ner_last_error_line(void) { return last_line; }

void ner_string_free(char* s) { std::free(s); }

ner_status ner_dataset_load(const char* path, const char* format,
                            const char* options_json, ner_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    json o = ParseOptions(options_json, {"repair", "layer"});
    nerpipe::LoadOptions options;
    options.repair = Get(o, "repair", options.repair);
    options.column_layer = Get(o, "layer", options.column_layer);
    auto d = std::make_unique<ner_dataset>();
    d->rep = nerpipe::LoadDataset(path, nerpipe::ParseFormat(Str(format, "jsonl")),
                                  options);
    *out = d.release();
  });
}

ner_status ner_dataset_save(const ner_dataset* dataset, const char* path,
                            const char* format) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(path, "path");
    nerpipe::SaveDataset(dataset->rep, path, nerpipe::ParseFormat(Str(format, "jsonl")));
  });
}

size_t ner_dataset_size(const ner_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->rep.size();
}

ner_status ner_dataset_sentence_json(const ner_dataset* dataset, size_t index,
                                     char** out_json) {
  return Guard([&] {
    Require(dataset, "dataset");
    Require(out_json, "out_json");
    const nerpipe::Dataset& d = dataset->rep;
    if (index >= d.size()) {
      throw Error(ErrorCode::kRange, "sentence index " + std::to_string(index) +
                                         " out of range");
    }
    ojson j;
    j["id"] = d.sentence(index).id;
    j["text"] = d.sentence(index).text;
    j["layers"] = ojson::object();
    for (const std::string& name : d.LayerNames()) {
      j["layers"][name] = nerpipe::SpansToJson(d.layer(name)[index]);
    }
    Emit(out_json, j);
  });
}

void ner_dataset_free(ner_dataset* dataset) { delete dataset; }

ner_status ner_matcher_build(const char* dict_path, const char* options_json,
                             ner_matcher** out) {
  return Guard([&] {
    Require(dict_path, "dict_path");
    Require(out, "out");
    json o = ParseOptions(options_json, {"min_surface_len", "abbreviations", "rules_path"});
    nerpipe::NameDictionary dict =
        nerpipe::LoadDictionary(dict_path, Get<std::size_t>(o, "min_surface_len", 2));
    const std::string rules_path = Get<std::string>(o, "rules_path", "");
    if (Get(o, "abbreviations", false) || !rules_path.empty()) {
      auto rules = rules_path.empty()
                       ? nerpipe::DefaultAbbreviationRules()
                       : nerpipe::ParseAbbreviationRules(nerpipe::ReadFile(rules_path));
      nerpipe::ExpandAbbreviations(&dict, rules);
    }
    auto m = std::make_unique<ner_matcher>();
    m->rep = nerpipe::Matcher::Build(dict);
    *out = m.release();
  });
}

ner_status ner_matcher_match(const ner_matcher* matcher, const char* text,
                             char** out_json) {
  return Guard([&] {
    Require(matcher, "matcher");
    Require(text, "text");
    Require(out_json, "out_json");
    Emit(out_json, nerpipe::SpansToJson(matcher->rep.Match(nerpipe::DecodeUtf8(text))));
  });
}

void ner_matcher_free(ner_matcher* matcher) { delete matcher; }

ner_status ner_annotate(const ner_matcher* matcher, const char* in_path,
                        const char* out_path, const char* secondary_path,
                        const char* layer, char** out_result_json) {
  return Guard([&] {
    Require(matcher, "matcher");
    Require(in_path, "in_path");
    Require(out_path, "out_path");
    nerpipe::Dataset input = Jsonl(in_path);
    std::unique_ptr<nerpipe::ReplayAnnotator> secondary;
    if (secondary_path != nullptr && *secondary_path != '\0') {
      secondary = nerpipe::ReplayAnnotator::Load(secondary_path);
    }
    nerpipe::AnnotateStats stats;
    nerpipe::Dataset annotated = nerpipe::AnnotateCorpus(
        input, matcher->rep, secondary.get(), &stats, Str(layer, "coarse"));
    nerpipe::SaveDataset(annotated, out_path, nerpipe::DatasetFormat::kJsonl);
    Emit(out_result_json, {{"sentences", annotated.size()},
                           {"matcher_spans", stats.matcher_spans},
                           {"secondary_spans", stats.secondary_spans},
                           {"warnings", stats.warnings}});
  });
}

ner_status ner_model_load(const char* path, ner_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto m = std::make_unique<ner_model>();
    m->rep = nerpipe::LoadModel(path);
    *out = m.release();
  });
}

ner_status ner_model_save(const ner_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    nerpipe::SaveModel(model->rep, path);
  });
}

ner_status ner_model_predict_text(const ner_model* model, const char* text,
                                  char** out_json) {
  return Guard([&] {
    Require(model, "model");
    Require(text, "text");
    Require(out_json, "out_json");
    nerpipe::Sentence s = nerpipe::Sentence::Make("input", text);
    Emit(out_json, nerpipe::SpansToJson(model->rep.Predict(s)));
  });
}

ner_status ner_model_info_json(const ner_model* model, char** out_json) {
  return Guard([&] {
    Require(model, "model");
    Require(out_json, "out_json");
    const nerpipe::CrfModel& m = model->rep;
    const nerpipe::EmitterConfig& ec = m.emitter().config();
    Emit(out_json,
         {{"labels", m.scheme().labels()},
          {"constrained", m.constrained()},
          {"emitter",
           {{"kind", m.emitter_kind() == nerpipe::EmitterKind::kHashed ? "hashed"
                                                                        : "external"},
            {"window", ec.window},
            {"hash_bits", ec.hash_bits},
            {"hash_seed", ec.hash_seed}}},
          {"train_seed", m.train_seed()},
          {"format_version", nerpipe::kModelFormatVersion}});
  });
}

void ner_model_free(ner_model* model) { delete model; }

ner_status ner_synth(const char* config_json, const char* out_dir,
                     char** out_result_json) {
  return Guard([&] {
    Require(out_dir, "out_dir");
    json j = config_json != nullptr && *config_json != '\0' ? json::parse(config_json)
                                                            : json::object();
    nerpipe::SynthConfig config = nerpipe::SynthConfig::FromJson(j);
    nerpipe::SynthCorpus corpus = nerpipe::GenerateCorpus(config);
    auto sums = nerpipe::WriteCorpus(corpus, config, out_dir);
    ojson files = ojson::object();
    for (const auto& [name, crc] : sums) files[name] = crc;
    Emit(out_result_json, {{"files", files},
                           {"train", corpus.train.size()},
                           {"dev", corpus.dev.size()},
                           {"test", corpus.test.size()},
                           {"unlabeled", corpus.unlabeled.size()},
                           {"dictionary", corpus.dictionary.size()}});
  });
}

ner_status ner_train_outline(const char* train_path, const char* dev_path,
                             const char* model_out, const char* options_json,
                             char** out_result_json) {
  return Guard([&] {
    Require(train_path, "train_path");
    Require(dev_path, "dev_path");
    Require(model_out, "model_out");
    json o = ParseOptions(options_json, kTrainKeys);
    nerpipe::TrainConfig config = TrainFrom(o, nerpipe::TrainConfig{}.learning_rate);
    nerpipe::ModelSpec spec = SpecFrom(o, nerpipe::TeacherEmitterConfig());
    nerpipe::Dataset train = Jsonl(train_path);
    nerpipe::Dataset dev = DevWithGold(dev_path, Get<std::string>(o, "dev_layer", "gold"));
    nerpipe::FitResult history;
    nerpipe::CrfModel model = nerpipe::OutlineTrain(
        train, dev, spec, config, &history, Get<std::string>(o, "train_layer", "coarse"));
    nerpipe::SaveModel(model, model_out);
    Emit(out_result_json, History(history));
  });
}

ner_status ner_train_detail(const char* model_in, const char* corrected_path,
                            const char* dev_path, const char* model_out,
                            const char* options_json, char** out_result_json) {
  return Guard([&] {
    Require(model_in, "model_in");
    Require(corrected_path, "corrected_path");
    Require(dev_path, "dev_path");
    Require(model_out, "model_out");
    json o = ParseOptions(options_json, kTrainKeys);
    for (const char* key : {"labels", "constrained", "window", "hash_bits", "hash_seed"}) {
      if (o.contains(key)) {
        throw Error(ErrorCode::kConfig,
                    std::string("option '") + key + "' is fixed by the input model");
      }
    }
    nerpipe::TrainConfig config =
        TrainFrom(o, nerpipe::TrainConfig{}.learning_rate * 0.1);
    nerpipe::CrfModel model = nerpipe::LoadModel(model_in);
    nerpipe::Dataset corrected = Jsonl(corrected_path);
    nerpipe::Dataset dev = DevWithGold(dev_path, Get<std::string>(o, "dev_layer", "gold"));
    nerpipe::FitResult history;
    std::vector<std::string> warnings;
    nerpipe::CrfModel out = nerpipe::DetailTrain(
        model, corrected, dev, config, &history, &warnings,
        Get<std::string>(o, "train_layer", "corrected"));
    nerpipe::SaveModel(out, model_out);
    ojson result = History(history);
    result["warnings"] = warnings;
    Emit(out_result_json, result);
  });
}

ner_status ner_select(const char* model_path, const char* coarse_path,
                      const char* layer, const char* store_out, int threads,
                      char** out_result_json) {
  return Guard([&] {
    Require(model_path, "model_path");
    Require(coarse_path, "coarse_path");
    Require(store_out, "store_out");
    nerpipe::CrfModel model = nerpipe::LoadModel(model_path);
    nerpipe::Dataset coarse = Jsonl(coarse_path);
    auto records = nerpipe::SelectDisagreements(model, coarse, Str(layer, "coarse"),
                                                threads);
    nerpipe::DisagreementStore::Create(store_out, records);
    Emit(out_result_json, {{"records", records.size()}, {"sentences", coarse.size()}});
  });
}

ner_status ner_oracle_correct(const char* store_path, const char* gold_path,
                              const char* gold_layer, const char* annotator_id,
                              char** out_result_json) {
  return Guard([&] {
    Require(store_path, "store_path");
    Require(gold_path, "gold_path");
    if (!nerpipe::FileExists(store_path)) {
      throw Error(ErrorCode::kIo, std::string("store not found: ") + store_path);
    }
    auto store = nerpipe::DisagreementStore::Open(store_path);
    nerpipe::Dataset gold = Jsonl(gold_path);
    std::vector<nerpipe::DisagreementRecord> todo;
    for (auto& r : store.Snapshot()) {
      if (r.status == nerpipe::RecordStatus::kPending) todo.push_back(std::move(r));
    }
    nerpipe::OracleCorrect(gold, &todo, Str(gold_layer, "gold"), Str(annotator_id, "oracle"));
    store.AppendAll(todo);
    Emit(out_result_json, {{"corrected", todo.size()}});
  });
}

ner_status ner_export_corrected(const char* store_path, const char* out_path,
                                char** out_result_json) {
  return Guard([&] {
    Require(store_path, "store_path");
    Require(out_path, "out_path");
    std::vector<std::string> warnings;
    nerpipe::Dataset d = nerpipe::ExportCorrected(store_path, &warnings);
    nerpipe::SaveDataset(d, out_path, nerpipe::DatasetFormat::kJsonl);
    Emit(out_result_json, {{"sentences", d.size()}, {"warnings", warnings}});
  });
}

ner_status ner_distill(const char* teacher_path, const char* unlabeled_path,
                       const char* out_path, size_t max_len, int threads,
                       char** out_result_json) {
  return Guard([&] {
    Require(teacher_path, "teacher_path");
    Require(unlabeled_path, "unlabeled_path");
    Require(out_path, "out_path");
    nerpipe::CrfModel teacher = nerpipe::LoadModel(teacher_path);
    nerpipe::DistillStats stats;
    nerpipe::Dataset pseudo =
        nerpipe::Distill(teacher, Jsonl(unlabeled_path), max_len, threads, &stats);
    nerpipe::SaveDataset(pseudo, out_path, nerpipe::DatasetFormat::kJsonl);
    Emit(out_result_json, {{"labeled", stats.labeled}, {"skipped", stats.skipped}});
  });
}

ner_status ner_train_student(const char* pseudo_path, const char* dev_path,
                             const char* model_out, const char* options_json,
                             char** out_result_json) {
  return Guard([&] {
    Require(pseudo_path, "pseudo_path");
    Require(dev_path, "dev_path");
    Require(model_out, "model_out");
    json o = ParseOptions(options_json, kTrainKeys);
    if (o.contains("train_layer")) {
      throw Error(ErrorCode::kConfig, "train-student always trains on layer 'pseudo'");
    }
    nerpipe::TrainConfig config = TrainFrom(o, nerpipe::TrainConfig{}.learning_rate);
    nerpipe::ModelSpec spec = SpecFrom(o, nerpipe::StudentEmitterConfig());
    nerpipe::Dataset dev = DevWithGold(dev_path, Get<std::string>(o, "dev_layer", "gold"));
    nerpipe::FitResult history;
    nerpipe::CrfModel model =
        nerpipe::TrainStudent(Jsonl(pseudo_path), dev, spec, config, &history);
    nerpipe::SaveModel(model, model_out);
    Emit(out_result_json, History(history));
  });
}

ner_status ner_predict(const char* model_path, const char* in_path,
                       const char* out_path, const char* layer, int threads,
                       const char* format) {
  return Guard([&] {
    Require(model_path, "model_path");
    Require(in_path, "in_path");
    Require(out_path, "out_path");
    nerpipe::CrfModel model = nerpipe::LoadModel(model_path);
    const nerpipe::DatasetFormat fmt = nerpipe::ParseFormat(Str(format, "jsonl"));
    nerpipe::Dataset d = nerpipe::LoadDataset(
        in_path, nerpipe::SniffFormat(nerpipe::ReadFile(in_path)));
    std::vector<nerpipe::TagSequence> tags = nerpipe::DecodeBatch(model, d, threads);
    std::vector<nerpipe::SpanList> spans(tags.size());
    for (std::size_t i = 0; i < tags.size(); ++i) {
      spans[i] = nerpipe::TagsToSpans(tags[i], model.scheme());
    }
    const std::string name = Str(layer, "predicted");
    if (fmt == nerpipe::DatasetFormat::kColumn) {
      // Column files hold a single layer.
      for (const std::string& l : d.LayerNames()) d.RemoveLayer(l);
    }
    d.SetLayer(name, std::move(spans));
    nerpipe::SaveDataset(d, out_path, fmt);
  });
}

ner_status ner_eval(const char* predicted_path, const char* predicted_layer,
                    const char* gold_path, const char* gold_layer,
                    char** out_result_json) {
  return Guard([&] {
    Require(predicted_path, "predicted_path");
    Require(gold_path, "gold_path");
    nerpipe::Dataset predicted = Jsonl(predicted_path);
    nerpipe::Dataset gold = Jsonl(gold_path);
    nerpipe::EntityMetrics m = nerpipe::EntityPrf(
        predicted, Str(predicted_layer, "predicted"), gold, Str(gold_layer, "gold"));
    Emit(out_result_json, MetricsJson(m));
  });
}

ner_status ner_bench(const char* model_path, const char* corpus_path, int warmup,
                     int threads, int repeats, char** out_result_json) {
  return Guard([&] {
    Require(model_path, "model_path");
    Require(corpus_path, "corpus_path");
    nerpipe::CrfModel model = nerpipe::LoadModel(model_path);
    nerpipe::BenchReport b = nerpipe::ThroughputBench(model, Jsonl(corpus_path), warmup,
                                                      threads, model_path, repeats);
    char checksum[17];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(b.checksum));
    Emit(out_result_json, {{"model", b.model},
                           {"sentences", b.sentences},
                           {"characters", b.characters},
                           {"threads", b.threads},
                           {"repeats", b.repeats},
                           {"wall_time_seconds", b.wall_time_seconds},
                           {"sentences_per_second", b.sentences_per_second},
                           {"characters_per_second", b.characters_per_second},
                           {"checksum", checksum}});
  });
}

ner_status ner_report(const char* runs_jsonl, char** out_result_json) {
  return Guard([&] {
    Require(runs_jsonl, "runs_jsonl");
    nerpipe::ComparisonReport r =
        nerpipe::CompareReport(nerpipe::ParseRunRecords(runs_jsonl));
    Emit(out_result_json, {{"table", r.table}, {"jsonl", r.jsonl}});
  });
}

ner_status ner_pipeline_run(const char* config_json, const char* stop_after,
                            ner_log_fn log, void* user_data,
                            char** out_state_json) {
  return Guard([&] {
    json j = config_json != nullptr && *config_json != '\0' ? json::parse(config_json)
                                                            : json::object();
    nerpipe::PipelineConfig config = nerpipe::PipelineConfig::FromJson(j);
    nerpipe::RunOptions options;
    if (stop_after != nullptr && *stop_after != '\0') {
      options.stop_after = nerpipe::ParseStage(stop_after);
    }
    if (log != nullptr) {
      options.log = [log, user_data](const std::string& line) {
        log(line.c_str(), user_data);
      };
    }
    nerpipe::PipelineState state = nerpipe::RunPipeline(config, options);
    Emit(out_state_json, state.ToJson());
  });
}

ner_status ner_pipeline_status(const char* config_json, char** out_state_json) {
  return Guard([&] {
    json j = config_json != nullptr && *config_json != '\0' ? json::parse(config_json)
                                                            : json::object();
    nerpipe::PipelineConfig config = nerpipe::PipelineConfig::FromJson(j);
    Emit(out_state_json, nerpipe::LoadState(nerpipe::StatePath(config)).ToJson());
  });
}

ner_status ner_review_server_start(const char* options_json,
                                   ner_review_server** out) {
  return Guard([&] {
    Require(out, "out");
    json o = ParseOptions(options_json, {"store", "dataset", "bind", "ui_dir", "labels"});
    nerpipe::ReviewServerOptions options;
    options.store_path = Get<std::string>(o, "store", "");
    if (options.store_path.empty()) {
      throw Error(ErrorCode::kUsage, "review server needs a store path");
    }
    options.dataset_path = Get<std::string>(o, "dataset", "");
    options.bind = Get(o, "bind", options.bind);
    options.ui_dir = Get<std::string>(o, "ui_dir", "");
    options.labels = Get(o, "labels", options.labels);
    auto s = std::make_unique<ner_review_server>();
    s->rep = std::make_unique<nerpipe::ReviewServer>(options);
    s->rep->Start();
    *out = s.release();
  });
}

int ner_review_server_port(const ner_review_server* server) {
  return server == nullptr ? -1 : server->rep->port();
}

void ner_review_server_wait(ner_review_server* server) {
  if (server != nullptr) server->rep->Wait();
}

void ner_review_server_stop(ner_review_server* server) {
  if (server != nullptr) server->rep->Stop();
}

void ner_review_server_free(ner_review_server* server) { delete server; }

}  // extern "C"
