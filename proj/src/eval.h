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

// Entity-level scoring, decode throughput and run comparison tables.

#ifndef NERPIPE_EVAL_H_
#define NERPIPE_EVAL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corpus.h"
#include "crf.h"

namespace nerpipe {

struct EntityMetrics {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // Ratios with a zero denominator are 0.
  static EntityMetrics FromCounts(std::size_t tp, std::size_t fp,
                                  std::size_t fn);
  EntityMetrics& operator+=(const EntityMetrics& other);
};

// A predicted span counts only if (start, end, label) appears in gold.
EntityMetrics CountSentence(const SpanList& predicted, const SpanList& gold);

// Micro-averaged over aligned per-sentence lists.
EntityMetrics EntityPrf(const std::vector<SpanList>& predicted,
                        const std::vector<SpanList>& gold);
// Aligns sentences by id. Throws IdMismatchError if the id sets differ.
EntityMetrics EntityPrf(const Dataset& predicted,
                        const std::string& predicted_layer,
                        const Dataset& gold, const std::string& gold_layer);

struct BenchReport {
  std::string model;
  std::size_t sentences = 0;
  std::size_t characters = 0;
  int threads = 1;
  int repeats = 1;
  double wall_time_seconds = 0.0;
  double sentences_per_second = 0.0;
  double characters_per_second = 0.0;
  uint64_t checksum = 0;  // of the decoded tags
};

// `warmup` untimed passes, then `repeats` timed decode passes; the fastest
// pass is reported. Throws EmptyCorpusError.
BenchReport ThroughputBench(const CrfModel& model, const Dataset& corpus,
                            int warmup = 1, int threads = 1,
                            const std::string& model_name = "model",
                            int repeats = 3);

struct RunRecord {
  std::string name;
  EntityMetrics metrics;
  double sentences_per_second = 0.0;
  double characters_per_second = 0.0;
};

struct ComparisonReport {
  std::string table;  // aligned, human-readable
  std::string jsonl;  // one record per run
};

// Deltas are against the first run, in percentage points. Throws UsageError
// on an empty list.
ComparisonReport CompareReport(const std::vector<RunRecord>& runs);
std::vector<RunRecord> ParseRunRecords(std::string_view jsonl);

}  // namespace nerpipe

#endif  // NERPIPE_EVAL_H_
