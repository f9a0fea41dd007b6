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

// HTTP review service over a disagreement store.
//
//   GET  /api/queue?status=pending|corrected|skipped&limit=N
//   GET  /api/record/{id}
//   POST /api/record/{id}/correction   {"spans": [...], "annotator_id": "..."}
//   POST /api/record/{id}/skip         {"annotator_id": "..."}
//   GET  /api/progress
//   GET  /                             review UI
//
// Every mutation is appended and fsynced before the response is sent.

#ifndef NERPIPE_REVIEW_SERVER_H_
#define NERPIPE_REVIEW_SERVER_H_

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "records.h"

namespace nerpipe {

struct ReviewServerOptions {
  std::string store_path;
  // Optional; when set, every record must name a sentence of this dataset
  // with the same text.
  std::string dataset_path;
  // "host:port"; port 0 picks a free port.
  std::string bind = "127.0.0.1:8787";
  // Static UI files; a built-in page is served when empty.
  std::string ui_dir;
  std::vector<std::string> labels = {"COM"};
};

// Splits "host:port". Throws InvalidArgumentError.
std::pair<std::string, int> ParseBindAddress(const std::string& bind);

class ReviewServer {
 public:
  // Opens the store. Throws StoreCorruptionError, DataError.
  explicit ReviewServer(const ReviewServerOptions& options);
  ~ReviewServer();

  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds and serves on a background thread. Throws BindError.
  void Start();
  // Blocks until Stop() is called.
  void Wait();
  void Stop();
  int port() const { return port_; }

  nlohmann::ordered_json Progress() const;
  const DisagreementStore& store() const { return store_; }

 private:
  class Impl;

  ReviewServerOptions options_;
  DisagreementStore store_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace nerpipe

#endif  // NERPIPE_REVIEW_SERVER_H_
