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

#include <fstream>

#include "doctest.h"
#include "error_util.h"
#include "records.h"
#include "test_util.h"
#include "util.h"

namespace nerpipe {
namespace {

using testing::CodeOf;

DisagreementRecord Pending(const std::string& id, int diffs = 1) {
  DisagreementRecord r;
  r.sentence_id = id;
  r.text = "平安银行发布公告";
  r.coarse_spans = {{0, 2, "COM"}};
  r.predicted_spans = {{0, 4, "COM"}};
  for (int i = 0; i < diffs; ++i) r.diff_positions.push_back(2 + i);
  return r;
}

DisagreementRecord Corrected(const std::string& id, SpanList spans) {
  DisagreementRecord r = Pending(id);
  r.status = RecordStatus::kCorrected;
  r.corrected_spans = std::move(spans);
  r.annotator_id = "ann";
  return r;
}

TEST_CASE("record validation") {
  CHECK_NOTHROW(Pending("a").Validate());
  CHECK_NOTHROW(Corrected("a", {}).Validate());
  DisagreementRecord no_diff = Pending("a", 0);
  CHECK(CodeOf([&] { no_diff.Validate(); }) == ErrorCode::kInvariant);
  DisagreementRecord stray = Pending("a");
  stray.corrected_spans = SpanList{};
  CHECK(CodeOf([&] { stray.Validate(); }) == ErrorCode::kInvariant);
  DisagreementRecord missing = Corrected("a", {});
  missing.corrected_spans.reset();
  CHECK(CodeOf([&] { missing.Validate(); }) == ErrorCode::kInvariant);
  DisagreementRecord skipped = Pending("a");
  skipped.status = RecordStatus::kSkipped;
  CHECK_NOTHROW(skipped.Validate());
}

TEST_CASE("status names") {
  for (RecordStatus s : {RecordStatus::kPending, RecordStatus::kCorrected, RecordStatus::kSkipped}) {
    CHECK(ParseStatus(StatusName(s)) == s);
  }
  CHECK(CodeOf([] { ParseStatus("done"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("record json round trip") {
  DisagreementRecord r = Corrected("s1", {{1, 3, "COM"}});
  CHECK(RecordFromJson(nlohmann::json::parse(RecordToJson(r).dump())) == r);
  DisagreementRecord p = Pending("s2", 3);
  CHECK(RecordFromJson(nlohmann::json::parse(RecordToJson(p).dump())) == p);
}

TEST_CASE("sorting puts large diffs first, then ids") {
  std::vector<DisagreementRecord> rs = {Pending("b", 1), Pending("c", 3), Pending("a", 1),
                                        Pending("d", 3)};
  SortRecords(&rs);
  std::vector<std::string> ids;
  for (const auto& r : rs) ids.push_back(r.sentence_id);
  CHECK(ids == std::vector<std::string>{"c", "d", "a", "b"});
}

TEST_CASE("replay keeps the latest line per sentence") {
  std::string log = StoreLine(Pending("a")) + StoreLine(Pending("b")) +
                    StoreLine(Corrected("a", {{0, 4, "COM"}})) +
                    StoreLine(Corrected("a", {}));
  StoreReplay r = ReplayStore(log);
  CHECK(r.lines == 4);
  CHECK_FALSE(r.torn_tail);
  CHECK(r.valid_bytes == log.size());
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0] == Corrected("a", {}));
  CHECK(r.records[1] == Pending("b"));
}

TEST_CASE("replay discards a torn tail and rejects corrupt lines") {
  const std::string good = StoreLine(Pending("a"));
  const std::string next = StoreLine(Pending("b"));
  StoreReplay torn = ReplayStore(good + next.substr(0, next.size() / 2));
  CHECK(torn.torn_tail);
  CHECK(torn.valid_bytes == good.size());
  CHECK(torn.records.size() == 1);

  std::string flipped = next;
  flipped[flipped.find("平")] = 'X';
  try {
    ReplayStore(good + flipped);
    FAIL("expected StoreCorruptionError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStoreCorruption);
    CHECK(e.line() == 2);
  }
  CHECK(CodeOf([&] { ReplayStore(good + "{not json\n"); }) == ErrorCode::kStoreCorruption);
  CHECK(CodeOf([&] { ReplayStore("{\"sentence_id\":\"x\"}\n"); }) == ErrorCode::kStoreCorruption);
  CHECK(ReplayStore(good + "\n  \n").records.size() == 1);
}

TEST_CASE("store append, reopen and torn-tail repair") {
  testing::TempDir dir;
  const std::string path = dir.Path("store.jsonl");
  DisagreementStore::Create(path, {Pending("a"), Pending("b", 2)});
  {
    DisagreementStore s = DisagreementStore::Open(path);
    CHECK(s.Snapshot().size() == 2);
    s.Append(Corrected("a", {{0, 2, "COM"}}));
    CHECK(s.Find("a")->status == RecordStatus::kCorrected);
    CHECK_FALSE(s.Find("zzz").has_value());
    CHECK(CodeOf([&] { s.Append(Pending("c", 0)); }) == ErrorCode::kInvariant);
  }
  const std::string before = ReadFile(path);
  {
    std::string partial = StoreLine(Corrected("b", {}));
    partial.resize(partial.size() - 5);
    std::ofstream(path, std::ios::app | std::ios::binary) << partial;
  }
  DisagreementStore reopened = DisagreementStore::Open(path);
  CHECK(reopened.recovered_torn_tail());
  CHECK(ReadFile(path) == before);
  CHECK(reopened.Find("a")->corrected_spans == SpanList{{0, 2, "COM"}});
  CHECK(reopened.Find("b")->status == RecordStatus::kPending);

  reopened.AppendAll({Corrected("b", {}), Pending("c")});
  CHECK(DisagreementStore::Open(path).Snapshot() == reopened.Snapshot());

  CHECK(DisagreementStore::Open(dir.Path("missing.jsonl")).Snapshot().empty());
}

}  // namespace
}  // namespace nerpipe
