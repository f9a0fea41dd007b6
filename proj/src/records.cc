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

#include "records.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>

#include "status.h"
#include "util.h"

namespace nerpipe {

std::string_view StatusName(RecordStatus status) {
  switch (status) {
    case RecordStatus::kPending:
      return "pending";
    case RecordStatus::kCorrected:
      return "corrected";
    case RecordStatus::kSkipped:
      return "skipped";
  }
  return "pending";
}

RecordStatus ParseStatus(std::string_view name) {
  if (name == "pending") return RecordStatus::kPending;
  if (name == "corrected") return RecordStatus::kCorrected;
  if (name == "skipped") return RecordStatus::kSkipped;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown record status '" + std::string(name) + "'");
}

void DisagreementRecord::Validate() const {
  if (diff_positions.empty()) {
    throw Error(ErrorCode::kInvariant,
                "record " + sentence_id + " has no diff positions");
  }
  if (corrected_spans.has_value() != (status == RecordStatus::kCorrected)) {
    throw Error(ErrorCode::kInvariant,
                "record " + sentence_id +
                    ": corrected_spans must be present iff status is corrected");
  }
}

nlohmann::ordered_json SpansToJson(const SpanList& spans) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const Span& s : spans) {
    out.push_back({{"start", s.start}, {"end", s.end}, {"label", s.label}});
  }
  return out;
}

SpanList SpansFromJson(const nlohmann::json& json) {
  if (!json.is_array()) {
    throw Error(ErrorCode::kParse, "spans must be a JSON array");
  }
  SpanList spans;
  try {
    for (const auto& s : json) {
      spans.push_back({s.at("start").get<int>(), s.at("end").get<int>(),
                       s.at("label").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad span: ") + e.what());
  }
  return spans;
}

nlohmann::ordered_json RecordToJson(const DisagreementRecord& r) {
  nlohmann::ordered_json j;
  j["sentence_id"] = r.sentence_id;
  j["text"] = r.text;
  j["coarse_spans"] = SpansToJson(r.coarse_spans);
  j["predicted_spans"] = SpansToJson(r.predicted_spans);
  j["diff_positions"] = r.diff_positions;
  j["status"] = StatusName(r.status);
  j["corrected_spans"] = r.corrected_spans ? SpansToJson(*r.corrected_spans)
                                           : nlohmann::ordered_json(nullptr);
  j["annotator_id"] = r.annotator_id;
  return j;
}

DisagreementRecord RecordFromJson(const nlohmann::json& j) {
  DisagreementRecord r;
  try {
    r.sentence_id = j.at("sentence_id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.coarse_spans = SpansFromJson(j.at("coarse_spans"));
    r.predicted_spans = SpansFromJson(j.at("predicted_spans"));
    r.diff_positions = j.at("diff_positions").get<std::vector<int>>();
    r.status = ParseStatus(j.at("status").get<std::string>());
    if (j.contains("corrected_spans") && !j.at("corrected_spans").is_null()) {
      r.corrected_spans = SpansFromJson(j.at("corrected_spans"));
    }
    r.annotator_id = j.value("annotator_id", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad record: ") + e.what());
  }
  return r;
}

void SortRecords(std::vector<DisagreementRecord>* records) {
  std::stable_sort(records->begin(), records->end(),
                   [](const DisagreementRecord& a, const DisagreementRecord& b) {
                     if (a.diff_positions.size() != b.diff_positions.size()) {
                       return a.diff_positions.size() > b.diff_positions.size();
                     }
                     return a.sentence_id < b.sentence_id;
                   });
}

std::string StoreLine(const DisagreementRecord& record) {
  nlohmann::ordered_json j = RecordToJson(record);
  const std::string body = j.dump();
  j["checksum"] = Crc32Hex(body);
  return j.dump() + "\n";
}

StoreReplay ReplayStore(std::string_view contents) {
  StoreReplay out;
  std::map<std::string, std::size_t> index;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) {
      out.torn_tail = true;
      break;
    }
    std::string_view line = contents.substr(pos, nl - pos);
    const std::size_t line_no = ++out.lines;
    pos = nl + 1;
    out.valid_bytes = pos;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::kStoreCorruption,
                  "store line " + std::to_string(line_no) + ": " + why,
                  static_cast<long>(line_no));
    };
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
    if (!j.is_object() || !j.contains("checksum") || !j["checksum"].is_string()) {
      fail("missing checksum");
    }
    const std::string checksum = j["checksum"].get<std::string>();
    j.erase("checksum");
    if (Crc32Hex(j.dump()) != checksum) fail("checksum mismatch");
    DisagreementRecord record;
    try {
      record = RecordFromJson(j);
      record.Validate();
    } catch (const Error& e) {
      fail(e.what());
    }
    auto it = index.find(record.sentence_id);
    if (it == index.end()) {
      index.emplace(record.sentence_id, out.records.size());
      out.records.push_back(std::move(record));
    } else {
      out.records[it->second] = std::move(record);
    }
  }
  return out;
}

DisagreementStore DisagreementStore::Open(const std::string& path) {
  DisagreementStore store;
  store.path_ = path;
  if (!FileExists(path)) return store;
  const std::string contents = ReadFile(path);
  StoreReplay replay = ReplayStore(contents);
  if (replay.torn_tail) {
    if (::truncate(path.c_str(), static_cast<off_t>(replay.valid_bytes)) != 0) {
      throw Error(ErrorCode::kIo, "cannot truncate torn tail of " + path);
    }
    store.torn_tail_ = true;
  }
  store.records_ = std::move(replay.records);
  for (std::size_t i = 0; i < store.records_.size(); ++i) {
    store.index_[store.records_[i].sentence_id] = i;
  }
  return store;
}

void DisagreementStore::Create(const std::string& path,
                               const std::vector<DisagreementRecord>& records) {
  std::string contents;
  for (const DisagreementRecord& r : records) {
    r.Validate();
    contents += StoreLine(r);
  }
  AtomicWriteFile(path, contents);
}

DisagreementStore::DisagreementStore(DisagreementStore&& other) noexcept
    : path_(std::move(other.path_)),
      records_(std::move(other.records_)),
      index_(std::move(other.index_)),
      torn_tail_(other.torn_tail_) {}

void DisagreementStore::Append(const DisagreementRecord& record) {
  AppendAll({record});
}

void DisagreementStore::AppendAll(
    const std::vector<DisagreementRecord>& records) {
  std::string lines;
  for (const DisagreementRecord& r : records) {
    r.Validate();
    lines += StoreLine(r);
  }
  std::lock_guard<std::mutex> lock(mu_);
  int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot open store " + path_);
  std::size_t done = 0;
  while (done < lines.size()) {
    ssize_t n = ::write(fd, lines.data() + done, lines.size() - done);
    if (n <= 0) {
      ::close(fd);
      throw Error(ErrorCode::kIo, "short write to store " + path_);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw Error(ErrorCode::kIo, "fsync failed on store " + path_);
  }
  ::close(fd);
  for (const DisagreementRecord& r : records) {
    auto it = index_.find(r.sentence_id);
    if (it == index_.end()) {
      index_.emplace(r.sentence_id, records_.size());
      records_.push_back(r);
    } else {
      records_[it->second] = r;
    }
  }
}

std::vector<DisagreementRecord> DisagreementStore::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_;
}

std::optional<DisagreementRecord> DisagreementStore::Find(
    const std::string& sentence_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find(sentence_id);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second];
}

}  // namespace nerpipe
