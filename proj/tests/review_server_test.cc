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

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <thread>

#include "doctest.h"
#include "error_util.h"
#include "httplib.h"
#include "review_server.h"
#include "test_util.h"
#include "util.h"

namespace nerpipe {
namespace {

using nlohmann::json;
using testing::CodeOf;

DisagreementRecord Pending(const std::string& id, int diffs) {
  DisagreementRecord r;
  r.sentence_id = id;
  r.text = "平安银行发布公告";
  r.coarse_spans = {{0, 2, "COM"}};
  r.predicted_spans = {{0, 4, "COM"}};
  for (int i = 0; i < diffs; ++i) r.diff_positions.push_back(2 + i);
  return r;
}

struct Fixture {
  testing::TempDir dir;
  std::string store_path = dir.Path("records.jsonl");
  std::unique_ptr<ReviewServer> server;
  std::unique_ptr<httplib::Client> client;

  explicit Fixture(std::vector<DisagreementRecord> records) {
    DisagreementStore::Create(store_path, records);
    ReviewServerOptions o;
    o.store_path = store_path;
    o.bind = "127.0.0.1:0";
    server = std::make_unique<ReviewServer>(o);
    server->Start();
    client = std::make_unique<httplib::Client>("127.0.0.1", server->port());
  }

  json Get(const std::string& path, int want = 200) {
    auto res = client->Get(path);
    REQUIRE(res);
    CHECK(res->status == want);
    return json::parse(res->body);
  }

  json Post(const std::string& path, const json& body, int want = 200) {
    auto res = client->Post(path, body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == want);
    return json::parse(res->body);
  }
};

std::vector<DisagreementRecord> ThreeRecords() {
  return {Pending("b", 1), Pending("a", 3), Pending("c", 2)};
}

TEST_CASE("queue lists pending records by diff size") {
  Fixture f(ThreeRecords());
  json q = f.Get("/api/queue?status=pending");
  CHECK(q["total"] == 3);
  std::vector<std::string> ids;
  for (const auto& r : q["records"]) ids.push_back(r["sentence_id"]);
  CHECK(ids == std::vector<std::string>{"a", "c", "b"});
  CHECK(f.Get("/api/queue?limit=1")["records"].size() == 1);
  CHECK(f.Get("/api/queue?status=corrected")["records"].empty());
  f.Get("/api/queue?status=nope", 400);
  f.Get("/api/queue?limit=-1", 400);
}

TEST_CASE("a correction is visible to the next read") {
  Fixture f(ThreeRecords());
  json done = f.Post("/api/record/a/correction",
                     {{"spans", {{{"start", 0}, {"end", 4}, {"label", "COM"}}}},
                      {"annotator_id", "ann1"}});
  CHECK(done["status"] == "corrected");
  json r = f.Get("/api/record/a");
  CHECK(r["status"] == "corrected");
  CHECK(r["annotator_id"] == "ann1");
  CHECK(r["corrected_spans"][0]["end"] == 4);
  CHECK(f.Get("/api/queue?status=pending")["total"] == 2);

  f.Post("/api/record/b/skip", json::object());
  json p = f.Get("/api/progress");
  CHECK(p["pending"] == 1);
  CHECK(p["corrected"] == 1);
  CHECK(p["skipped"] == 1);
  CHECK(p["total"] == 3);
  CHECK(p["pending"].get<int>() + p["corrected"].get<int>() + p["skipped"].get<int>() ==
        p["total"].get<int>());

  // The store on disk already holds both mutations.
  DisagreementStore reread = DisagreementStore::Open(f.store_path);
  CHECK(reread.Find("a")->status == RecordStatus::kCorrected);
  CHECK(reread.Find("b")->status == RecordStatus::kSkipped);
}

TEST_CASE("invalid corrections leave the store untouched") {
  Fixture f(ThreeRecords());
  const std::string before = ReadFile(f.store_path);
  json overlap = f.Post("/api/record/a/correction",
                        {{"spans",
                          {{{"start", 0}, {"end", 3}, {"label", "COM"}},
                           {{"start", 2}, {"end", 4}, {"label", "COM"}}}}},
                        422);
  CHECK(overlap["error"] == "OverlapError");
  f.Post("/api/record/a/correction", {{"spans", {{{"start", 0}, {"end", 99}, {"label", "COM"}}}}},
         422);
  f.Post("/api/record/a/correction", {{"spans", {{{"start", 0}, {"end", 2}, {"label", "PER"}}}}},
         422);
  f.Post("/api/record/a/correction", {{"annotator_id", "x"}}, 400);
  f.Post("/api/record/zzz/skip", json::object(), 404);
  f.Get("/api/record/zzz", 404);
  auto bad = f.client->Post("/api/record/a/correction", "{oops", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(ReadFile(f.store_path) == before);
  CHECK(f.Get("/api/record/a")["status"] == "pending");
}

TEST_CASE("the review page is served") {
  Fixture f(ThreeRecords());
  auto res = f.client->Get("/");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type").find("text/html") == 0);
}

TEST_CASE("concurrent writers all land in the store") {
  std::vector<DisagreementRecord> many;
  for (int i = 0; i < 40; ++i) many.push_back(Pending("r" + std::to_string(i), 1));
  Fixture f(many);
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", f.server->port());
      for (int i = t; i < 40; i += 4) {
        c.Post("/api/record/r" + std::to_string(i) + "/skip", "{}", "application/json");
      }
    });
  }
  for (auto& w : workers) w.join();
  std::size_t skipped = 0;
  for (const auto& r : DisagreementStore::Open(f.store_path).Snapshot()) {
    skipped += r.status == RecordStatus::kSkipped;
  }
  CHECK(skipped == 40);
}

TEST_CASE("an acknowledged correction survives a killed server") {
  testing::TempDir dir;
  const std::string store_path = dir.Path("records.jsonl");
  DisagreementStore::Create(store_path, ThreeRecords());
  int fds[2];
  REQUIRE(pipe(fds) == 0);
  pid_t child = fork();
  REQUIRE(child >= 0);
  if (child == 0) {
    close(fds[0]);
    ReviewServerOptions o;
    o.store_path = store_path;
    o.bind = "127.0.0.1:0";
    ReviewServer server(o);
    server.Start();
    int port = server.port();
    (void)!write(fds[1], &port, sizeof port);
    for (;;) pause();
  }
  close(fds[1]);
  int port = 0;
  REQUIRE(read(fds[0], &port, sizeof port) == sizeof port);
  close(fds[0]);
  {
    httplib::Client c("127.0.0.1", port);
    auto res = c.Post("/api/record/c/correction",
                      R"({"spans":[{"start":4,"end":8,"label":"COM"}],"annotator_id":"k"})",
                      "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
  }
  kill(child, SIGKILL);
  int status = 0;
  waitpid(child, &status, 0);
  CHECK(WIFSIGNALED(status));

  DisagreementStore store = DisagreementStore::Open(store_path);
  auto c = store.Find("c");
  REQUIRE(c.has_value());
  CHECK(c->status == RecordStatus::kCorrected);
  CHECK(c->corrected_spans == SpanList{{4, 8, "COM"}});
}

TEST_CASE("startup checks") {
  CHECK(ParseBindAddress("0.0.0.0:8080") == std::pair<std::string, int>{"0.0.0.0", 8080});
  CHECK(CodeOf([] { ParseBindAddress("8080"); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { ParseBindAddress("h:99999"); }) == ErrorCode::kInvalidArgument);

  testing::TempDir dir;
  const std::string store_path = dir.Path("records.jsonl");
  DisagreementStore::Create(store_path, ThreeRecords());
  Dataset d;
  d.AddSentence(Sentence::Make("a", "平安银行发布公告"));
  SaveDataset(d, dir.Path("data.jsonl"), DatasetFormat::kJsonl);
  ReviewServerOptions o;
  o.store_path = store_path;
  o.dataset_path = dir.Path("data.jsonl");
  CHECK(CodeOf([&] { ReviewServer s(o); }) == ErrorCode::kUnknownSentence);

  AtomicWriteFile(store_path, "garbage\n");
  ReviewServerOptions bad;
  bad.store_path = store_path;
  CHECK(CodeOf([&] { ReviewServer s(bad); }) == ErrorCode::kStoreCorruption);

  // Two servers cannot share a port.
  DisagreementStore::Create(store_path, ThreeRecords());
  ReviewServerOptions first;
  first.store_path = store_path;
  first.bind = "127.0.0.1:0";
  ReviewServer a(first);
  a.Start();
  ReviewServerOptions second = first;
  second.bind = "127.0.0.1:" + std::to_string(a.port());
  ReviewServer b(second);
  CHECK(CodeOf([&] { b.Start(); }) == ErrorCode::kBind);
}

}  // namespace
}  // namespace nerpipe
