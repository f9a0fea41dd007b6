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

#ifndef NERPIPE_STATUS_H_
#define NERPIPE_STATUS_H_

#include <optional>
#include <stdexcept>
#include <string>

namespace nerpipe {

// Error kinds raised by the core library. The numeric values are part of the
// C API (see include/nerpipe/nerpipe.h) and must stay in sync with it.
enum class ErrorCode : int {
  kInvalidArgument = 10,
  kUsage = 11,
  kParse = 20,
  kInvariant = 21,
  kOverlap = 22,
  kRange = 23,
  kUnknownLabel = 24,
  kShapeMismatch = 25,
  kInvalidGold = 26,
  kInfeasible = 27,
  kVersion = 28,
  kCorruption = 29,
  kEmptyDictionary = 30,
  kData = 31,
  kUnknownSentence = 32,
  kIdMismatch = 33,
  kEmptyCorpus = 34,
  kConfig = 35,
  kStoreCorruption = 36,
  kIo = 37,
  kDivergence = 40,
  kBind = 41,
  kInternal = 50,
};

// Short CamelCase name, e.g. "OverlapError".
const char* ErrorName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<long> line = std::nullopt)
      : std::runtime_error(message), code_(code), line_(line) {}

  ErrorCode code() const { return code_; }
  // 1-based line number for parse errors.
  std::optional<long> line() const { return line_; }

 private:
  ErrorCode code_;
  std::optional<long> line_;
};

}  // namespace nerpipe

#endif  // NERPIPE_STATUS_H_
