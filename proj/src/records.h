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

// Disagreement records and their append-only JSON Lines store.
//
// Each store line is one record serialized as JSON with an extra "checksum"
// member: the CRC-32 (hex) of the line re-serialized without that member.
// The latest line for a sentence id supersedes earlier ones. A final line
// with no terminating newline is a torn write and is discarded on open.

#ifndef NERPIPE_RECORDS_H_
#define NERPIPE_RECORDS_H_

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.h"
#include "json.hpp"

namespace nerpipe {

enum class RecordStatus { kPending, kCorrected, kSkipped };

std::string_view StatusName(RecordStatus status);
// Throws InvalidArgumentError for unknown names.
RecordStatus ParseStatus(std::string_view name);

struct DisagreementRecord {
  std::string sentence_id;
  std::string text;
  SpanList coarse_spans;
  SpanList predicted_spans;
  std::vector<int> diff_positions;
  RecordStatus status = RecordStatus::kPending;
  std::optional<SpanList> corrected_spans;
  std::string annotator_id;

  // Throws InvariantError if diff_positions is empty or corrected_spans is
  // present exactly when status is not corrected.
  void Validate() const;

  bool operator==(const DisagreementRecord&) const = default;
};

nlohmann::ordered_json SpansToJson(const SpanList& spans);
SpanList SpansFromJson(const nlohmann::json& json);

nlohmann::ordered_json RecordToJson(const DisagreementRecord& record);
DisagreementRecord RecordFromJson(const nlohmann::json& json);

// Orders records by diff size (largest first), then sentence id.
void SortRecords(std::vector<DisagreementRecord>* records);

// One store line including checksum and trailing newline.
std::string StoreLine(const DisagreementRecord& record);

struct StoreReplay {
  std::vector<DisagreementRecord> records;  // latest state, first-seen order
  std::size_t lines = 0;
  std::size_t valid_bytes = 0;  // prefix length that ends on a full line
  bool torn_tail = false;
};

// Throws StoreCorruptionError for a complete line that fails to parse or
// whose checksum does not match.
StoreReplay ReplayStore(std::string_view contents);

class DisagreementStore {
 public:
  // Replays `path` (a missing file is an empty store) and truncates a torn
  // tail. Throws StoreCorruptionError.
  static DisagreementStore Open(const std::string& path);
  // Atomically replaces `path` with one line per record.
  static void Create(const std::string& path,
                     const std::vector<DisagreementRecord>& records);

  DisagreementStore(DisagreementStore&& other) noexcept;
  DisagreementStore& operator=(DisagreementStore&&) = delete;

  // Validates, appends, fsyncs and then updates the in-memory view.
  void Append(const DisagreementRecord& record);
  // As Append, with a single fsync for the batch.
  void AppendAll(const std::vector<DisagreementRecord>& records);

  std::vector<DisagreementRecord> Snapshot() const;
  std::optional<DisagreementRecord> Find(const std::string& sentence_id) const;
  const std::string& path() const { return path_; }
  bool recovered_torn_tail() const { return torn_tail_; }

 private:
  DisagreementStore() = default;

  std::string path_;
  mutable std::mutex mu_;
  std::vector<DisagreementRecord> records_;
  std::map<std::string, std::size_t> index_;
  bool torn_tail_ = false;
};

}  // namespace nerpipe

#endif  // NERPIPE_RECORDS_H_
