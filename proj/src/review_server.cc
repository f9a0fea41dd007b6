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

#include "review_server.h"

#include <mutex>

#include "httplib.h"
#include "status.h"
#include "util.h"

namespace nerpipe {

namespace {

constexpr char kBuiltinPage[] = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>review queue</title>
<style>body{font-family:sans-serif;margin:2em}td{padding:2px 8px}
.d{background:#fd8}</style></head>
<body><h1>Disagreement queue</h1><p id="p"></p><table id="q"></table>
<script>
async function load(){
  const p=await (await fetch('/api/progress')).json();
  document.getElementById('p').textContent=
    `pending ${p.pending} / corrected ${p.corrected} / skipped ${p.skipped}`;
  const q=await (await fetch('/api/queue?status=pending&limit=50')).json();
  const t=document.getElementById('q');t.innerHTML='';
  for(const r of q.records){
    const chars=[...r.text],diff=new Set(r.diff_positions);
    const tr=t.insertRow(),a=tr.insertCell(),b=tr.insertCell(),c=tr.insertCell();
    a.textContent=r.sentence_id;
    chars.forEach((ch,i)=>{const s=document.createElement('span');
      s.textContent=ch;if(diff.has(i))s.className='d';b.appendChild(s);});
    const k=document.createElement('button');k.textContent='skip';
    k.onclick=async()=>{await fetch(`/api/record/${encodeURIComponent(r.sentence_id)}/skip`,
      {method:'POST',body:'{"annotator_id":"web"}'});load();};
    c.appendChild(k);
  }
}
load();
</script></body></html>
)";

void SendJson(httplib::Response& res, int status,
              const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& error,
               const std::string& message) {
  SendJson(res, status, {{"error", error}, {"message", message}});
}

}  // namespace

std::pair<std::string, int> ParseBindAddress(const std::string& bind) {
  std::size_t colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "bind address must be host:port, got '" + bind + "'");
  }
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(bind.substr(colon + 1), &used);
    if (used != bind.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in '" + bind + "'");
  }
  return {bind.substr(0, colon), port};
}

class ReviewServer::Impl {
 public:
  httplib::Server http;
  std::mutex write_mu;
};

ReviewServer::ReviewServer(const ReviewServerOptions& options)
    : options_(options),
      store_(DisagreementStore::Open(options.store_path)),
      impl_(std::make_unique<Impl>()) {
  LabelScheme scheme(options_.labels);
  if (!options_.dataset_path.empty()) {
    Dataset dataset = LoadDataset(options_.dataset_path, DatasetFormat::kJsonl);
    for (const DisagreementRecord& r : store_.Snapshot()) {
      auto index = dataset.Find(r.sentence_id);
      if (!index) {
        throw Error(ErrorCode::kUnknownSentence,
                    "store record " + r.sentence_id + " is not in " +
                        options_.dataset_path);
      }
      if (dataset.sentence(*index).text != r.text) {
        throw Error(ErrorCode::kData,
                    "store record " + r.sentence_id + " text differs from dataset");
      }
    }
  }

  httplib::Server& http = impl_->http;
  // httplib defaults to SO_REUSEPORT, which lets a second server share a
  // busy port.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  http.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<RecordStatus> status;
    if (req.has_param("status")) {
      try {
        status = ParseStatus(req.get_param_value("status"));
      } catch (const Error& e) {
        return SendError(res, 400, ErrorName(e.code()), e.what());
      }
    }
    long limit = -1;
    if (req.has_param("limit")) {
      try {
        limit = std::stol(req.get_param_value("limit"));
      } catch (const std::exception&) {
        limit = -2;
      }
      if (limit < 0) {
        return SendError(res, 400, "InvalidArgumentError",
                         "limit must be a non-negative integer");
      }
    }
    std::vector<DisagreementRecord> records;
    for (DisagreementRecord& r : store_.Snapshot()) {
      if (!status || r.status == *status) records.push_back(std::move(r));
    }
    SortRecords(&records);
    const std::size_t total = records.size();
    if (limit >= 0 && records.size() > static_cast<std::size_t>(limit)) {
      records.resize(limit);
    }
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& r : records) list.push_back(RecordToJson(r));
    SendJson(res, 200, {{"records", std::move(list)}, {"total", total}});
  });

  http.Get(R"(/api/record/([^/]+))",
           [this](const httplib::Request& req, httplib::Response& res) {
             auto record = store_.Find(req.matches[1]);
             if (!record) {
               return SendError(res, 404, "UnknownSentenceError",
                                "no record for sentence " + std::string(req.matches[1]));
             }
             SendJson(res, 200, RecordToJson(*record));
           });

  auto mutate = [this, scheme](const httplib::Request& req, httplib::Response& res,
                               bool correction) {
    const std::string id = req.matches[1];
    nlohmann::json body;
    try {
      body = req.body.empty() ? nlohmann::json::object()
                              : nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      return SendError(res, 400, "ParseError", e.what());
    }
    if (!body.is_object()) {
      return SendError(res, 400, "ParseError", "body must be a JSON object");
    }
    std::lock_guard<std::mutex> lock(impl_->write_mu);
    auto record = store_.Find(id);
    if (!record) {
      return SendError(res, 404, "UnknownSentenceError", "no record for sentence " + id);
    }
    DisagreementRecord updated = *record;
    updated.annotator_id = body.value("annotator_id", "");
    if (correction) {
      if (!body.contains("spans")) {
        return SendError(res, 400, "ParseError", "body needs a spans array");
      }
      SpanList spans;
      try {
        spans = SpansFromJson(body.at("spans"));
        SpansToTags(DecodeUtf8(updated.text).size(), spans, scheme);
      } catch (const Error& e) {
        int status = e.code() == ErrorCode::kParse ? 400 : 422;
        return SendError(res, status, ErrorName(e.code()), e.what());
      }
      std::sort(spans.begin(), spans.end());
      updated.status = RecordStatus::kCorrected;
      updated.corrected_spans = std::move(spans);
    } else {
      updated.status = RecordStatus::kSkipped;
      updated.corrected_spans.reset();
    }
    try {
      store_.Append(updated);
    } catch (const Error& e) {
      return SendError(res, 500, ErrorName(e.code()), e.what());
    }
    SendJson(res, 200, RecordToJson(updated));
  };
  http.Post(R"(/api/record/([^/]+)/correction)",
            [mutate](const httplib::Request& req, httplib::Response& res) {
              mutate(req, res, true);
            });
  http.Post(R"(/api/record/([^/]+)/skip)",
            [mutate](const httplib::Request& req, httplib::Response& res) {
              mutate(req, res, false);
            });

  http.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
    SendJson(res, 200, Progress());
  });

  if (!options_.ui_dir.empty()) {
    if (!http.set_mount_point("/", options_.ui_dir)) {
      throw Error(ErrorCode::kInvalidArgument, "UI directory not found: " + options_.ui_dir);
    }
  } else {
    http.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kBuiltinPage, "text/html; charset=utf-8");
    });
  }
}

ReviewServer::~ReviewServer() { Stop(); }

void ReviewServer::Start() {
  auto [host, port] = ParseBindAddress(options_.bind);
  httplib::Server& http = impl_->http;
  if (port == 0) {
    port_ = http.bind_to_any_port(host);
  } else {
    port_ = http.bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) {
    throw Error(ErrorCode::kBind, "cannot bind " + options_.bind);
  }
  thread_ = std::thread([&http] { http.listen_after_bind(); });
  http.wait_until_ready();
}

void ReviewServer::Wait() {
  if (thread_.joinable()) thread_.join();
}

void ReviewServer::Stop() {
  if (impl_) impl_->http.stop();
  Wait();
}

nlohmann::ordered_json ReviewServer::Progress() const {
  std::size_t pending = 0, corrected = 0, skipped = 0;
  std::size_t total = 0;
  for (const DisagreementRecord& r : store_.Snapshot()) {
    ++total;
    switch (r.status) {
      case RecordStatus::kPending:
        ++pending;
        break;
      case RecordStatus::kCorrected:
        ++corrected;
        break;
      case RecordStatus::kSkipped:
        ++skipped;
        break;
    }
  }
  return {{"pending", pending},
          {"corrected", corrected},
          {"skipped", skipped},
          {"total", total}};
}

}  // namespace nerpipe
