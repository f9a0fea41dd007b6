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

#ifndef NERPIPE_TESTS_ERROR_UTIL_H_
#define NERPIPE_TESTS_ERROR_UTIL_H_

#include <optional>

#include "status.h"

namespace nerpipe::testing {

// Code of the Error thrown by `fn`, or nullopt if it returns normally.
template <typename Fn>
std::optional<ErrorCode> CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace nerpipe::testing

#endif  // NERPIPE_TESTS_ERROR_UTIL_H_
