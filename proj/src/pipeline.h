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

// Two-stage training workflow: outline learning on machine-annotated data,
// disagreement selection, correction ingestion, detail learning on the
// corrected sentences, and teacher-to-student distillation.

#ifndef NERPIPE_PIPELINE_H_
#define NERPIPE_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "corpus.h"
#include "crf.h"
#include "emitter.h"
#include "json.hpp"
#include "records.h"
#include "synth.h"

namespace nerpipe {

struct ModelSpec {
  std::vector<std::string> labels = {"COM"};
  bool constrained = true;
  EmitterConfig emitter = TeacherEmitterConfig();
};

// Fresh model trained on `layer` of `coarse`. Throws DataError when the
// dataset is empty.
CrfModel OutlineTrain(const Dataset& coarse, const Dataset& dev,
                      const ModelSpec& spec, const TrainConfig& config,
                      FitResult* history = nullptr,
                      const std::string& layer = "coarse");

// One record per sentence whose decoded tags differ from the `layer` tags,
// sorted by SortRecords.
std::vector<DisagreementRecord> SelectDisagreements(
    const CrfModel& model, const Dataset& coarse,
    const std::string& layer = "coarse", int threads = 1);

// Marks every record corrected with the `gold_layer` spans of its sentence.
// Stands in for human annotators on synthetic data.
void OracleCorrect(const Dataset& gold, std::vector<DisagreementRecord>* records,
                   const std::string& gold_layer = "gold",
                   const std::string& annotator_id = "oracle");

// Dataset of the disputed sentences only, with layer "corrected". Records
// must be corrected or skipped (InvalidArgumentError otherwise); unknown ids
// raise UnknownSentenceError. Output follows the order of `coarse`.
Dataset ApplyCorrections(const Dataset& coarse,
                         const std::vector<DisagreementRecord>& records,
                         const std::string& layer = "coarse");

// ApplyCorrections over the latest non-pending records of a store; sentences
// are rebuilt from the records themselves. Throws StoreCorruptionError.
Dataset ExportCorrected(const std::string& store_path,
                        std::vector<std::string>* warnings = nullptr);

// Continues training `model` on `corrected`. An empty dataset returns the
// input model and adds a warning.
CrfModel DetailTrain(const CrfModel& model, const Dataset& corrected,
                     const Dataset& dev, const TrainConfig& config,
                     FitResult* history = nullptr,
                     std::vector<std::string>* warnings = nullptr,
                     const std::string& layer = "corrected");

struct DistillStats {
  std::size_t labeled = 0;
  std::size_t skipped = 0;
};

// Hard-label pseudo annotation (layer "pseudo") of every sentence no longer
// than `max_len` characters.
Dataset Distill(const CrfModel& teacher, const Dataset& unlabeled,
                std::size_t max_len = 512, int threads = 1,
                DistillStats* stats = nullptr);

// Fresh student trained on "pseudo" with early stopping on dev gold. Throws
// DataError for an empty pseudo dataset.
CrfModel TrainStudent(const Dataset& pseudo, const Dataset& dev,
                      const ModelSpec& spec, const TrainConfig& config,
                      FitResult* history = nullptr);

// ---------------------------------------------------------------------------
// Resumable end-to-end run.

enum class Stage { kOutline, kSelecting, kCorrecting, kDetail, kDistilling, kDone };

std::string_view StageName(Stage stage);
Stage ParseStage(std::string_view name);

struct PipelineConfig {
  std::string work_dir = "run";
  uint64_t seed = 1;
  int threads = 1;

  // Either a synthetic corpus is generated into work_dir/data, or existing
  // files are used.
  bool use_synth = true;
  SynthConfig synth = SynthConfig::Defaults();
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string unlabeled_path;
  std::string dict_path;

  ModelSpec teacher;
  ModelSpec student{{"COM"}, true, StudentEmitterConfig()};
  TrainConfig outline;
  TrainConfig detail;
  TrainConfig student_train;

  // "oracle" answers from the train gold layer; "store" waits for reviews.
  std::string correction_mode = "oracle";
  // In store mode, continue with pending records left out.
  bool allow_pending = false;
  std::size_t distill_max_len = 512;
  bool bench = true;

  static PipelineConfig Defaults();
  // Unspecified keys keep their defaults. Throws ConfigError.
  static PipelineConfig FromJson(const nlohmann::json& json);
  nlohmann::ordered_json ToJson() const;
  void Validate() const;
};

struct PipelineState {
  Stage stage = Stage::kOutline;
  nlohmann::ordered_json artifacts = nlohmann::ordered_json::object();
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;

  nlohmann::ordered_json ToJson() const;
  static PipelineState FromJson(const nlohmann::ordered_json& json);
};

std::string StatePath(const PipelineConfig& config);
// Missing file -> initial state.
PipelineState LoadState(const std::string& path);
void SaveState(const PipelineState& state, const std::string& path);

struct RunOptions {
  // Stop after completing this stage.
  std::optional<Stage> stop_after;
  // Receives one line per completed step.
  std::function<void(const std::string&)> log;
};

// Runs from the saved state to completion (or to `stop_after`, or until
// store-mode corrections are outstanding). Each stage reads its inputs from
// disk, so a resumed run produces the same files as an uninterrupted one.
PipelineState RunPipeline(const PipelineConfig& config,
                          const RunOptions& options = {});

}  // namespace nerpipe

#endif  // NERPIPE_PIPELINE_H_
