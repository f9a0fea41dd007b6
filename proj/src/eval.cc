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

#include "eval.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "status.h"

namespace nerpipe {

EntityMetrics EntityMetrics::FromCounts(std::size_t tp, std::size_t fp,
                                        std::size_t fn) {
  EntityMetrics m;
  m.true_positives = tp;
  m.false_positives = fp;
  m.false_negatives = fn;
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

EntityMetrics& EntityMetrics::operator+=(const EntityMetrics& other) {
  *this = FromCounts(true_positives + other.true_positives,
                     false_positives + other.false_positives,
                     false_negatives + other.false_negatives);
  return *this;
}

EntityMetrics CountSentence(const SpanList& predicted, const SpanList& gold) {
  SpanList p = predicted;
  SpanList g = gold;
  std::sort(p.begin(), p.end());
  std::sort(g.begin(), g.end());
  std::size_t tp = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < p.size() && j < g.size()) {
    if (p[i] == g[j]) {
      ++tp, ++i, ++j;
    } else if (p[i] < g[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return EntityMetrics::FromCounts(tp, p.size() - tp, g.size() - tp);
}

EntityMetrics EntityPrf(const std::vector<SpanList>& predicted,
                        const std::vector<SpanList>& gold) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::kIdMismatch,
                "predicted and gold layers cover different sentence counts");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    EntityMetrics m = CountSentence(predicted[i], gold[i]);
    tp += m.true_positives;
    fp += m.false_positives;
    fn += m.false_negatives;
  }
  return EntityMetrics::FromCounts(tp, fp, fn);
}

EntityMetrics EntityPrf(const Dataset& predicted,
                        const std::string& predicted_layer,
                        const Dataset& gold, const std::string& gold_layer) {
  const auto& p = predicted.layer(predicted_layer);
  const auto& g = gold.layer(gold_layer);
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::kIdMismatch,
                "predicted has " + std::to_string(predicted.size()) +
                    " sentences, gold has " + std::to_string(gold.size()));
  }
  std::vector<SpanList> aligned(gold.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const std::string& id = predicted.sentence(i).id;
    auto j = gold.Find(id);
    if (!j) {
      throw Error(ErrorCode::kIdMismatch, "sentence " + id + " missing from gold");
    }
    aligned[*j] = p[i];
  }
  return EntityPrf(aligned, g);
}

BenchReport ThroughputBench(const CrfModel& model, const Dataset& corpus,
                            int warmup, int threads,
                            const std::string& model_name, int repeats) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "benchmark corpus is empty");
  }
  BenchReport report;
  report.model = model_name;
  report.sentences = corpus.size();
  report.threads = std::max(1, threads);
  for (const Sentence& s : corpus.sentences()) report.characters += s.length();

  report.repeats = std::max(1, repeats);
  for (int i = 0; i < warmup; ++i) DecodeBatch(model, corpus, report.threads);
  std::vector<TagSequence> tags;
  double best = 0.0;
  for (int r = 0; r < report.repeats; ++r) {
    auto start = std::chrono::steady_clock::now();
    tags = DecodeBatch(model, corpus, report.threads);
    auto stop = std::chrono::steady_clock::now();
    double seconds = std::chrono::duration<double>(stop - start).count();
    if (r == 0 || seconds < best) best = seconds;
  }
  report.wall_time_seconds = std::max(best, 1e-9);
  report.sentences_per_second = report.sentences / report.wall_time_seconds;
  report.characters_per_second = report.characters / report.wall_time_seconds;

  uint64_t h = 0xcbf29ce484222325ULL;
  for (const TagSequence& seq : tags) {
    for (int t : seq) {
      h ^= static_cast<uint64_t>(t) + 1;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  }
  report.checksum = h;
  return report;
}

ComparisonReport CompareReport(const std::vector<RunRecord>& runs) {
  if (runs.empty()) {
    throw Error(ErrorCode::kUsage, "report needs at least one run");
  }
  std::size_t width = 4;
  for (const RunRecord& r : runs) width = std::max(width, r.name.size());
  ComparisonReport out;
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%-*s %7s %7s %7s %12s %8s %8s %8s\n",
                static_cast<int>(width), "name", "P", "R", "F1", "sent/s",
                "dP", "dR", "dF1");
  out.table += buf;
  const RunRecord& base = runs.front();
  for (const RunRecord& r : runs) {
    const EntityMetrics& m = r.metrics;
    std::snprintf(buf, sizeof(buf),
                  "%-*s %7.4f %7.4f %7.4f %12.1f %+8.1f %+8.1f %+8.1f\n",
                  static_cast<int>(width), r.name.c_str(), m.precision,
                  m.recall, m.f1, r.sentences_per_second,
                  100.0 * (m.precision - base.metrics.precision),
                  100.0 * (m.recall - base.metrics.recall),
                  100.0 * (m.f1 - base.metrics.f1));
    out.table += buf;
    nlohmann::ordered_json record;
    record["name"] = r.name;
    record["precision"] = m.precision;
    record["recall"] = m.recall;
    record["f1"] = m.f1;
    record["sentences_per_second"] = r.sentences_per_second;
    record["characters_per_second"] = r.characters_per_second;
    out.jsonl += record.dump();
    out.jsonl += '\n';
  }
  return out;
}

std::vector<RunRecord> ParseRunRecords(std::string_view jsonl) {
  std::vector<RunRecord> runs;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    std::string_view line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      RunRecord r;
      r.name = j.at("name").get<std::string>();
      r.metrics.precision = j.value("precision", 0.0);
      r.metrics.recall = j.value("recall", 0.0);
      r.metrics.f1 = j.value("f1", 0.0);
      r.sentences_per_second = j.value("sentences_per_second", 0.0);
      r.characters_per_second = j.value("characters_per_second", 0.0);
      runs.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return runs;
}

}  // namespace nerpipe
