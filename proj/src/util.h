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

// Small helpers shared by every module: UTF-8 conversion, file I/O with
// atomic replacement, checksums, and a portable random number generator.

#ifndef NERPIPE_UTIL_H_
#define NERPIPE_UTIL_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace nerpipe {

// Decodes UTF-8 into Unicode scalar values. Throws ParseError on malformed
// input (overlong forms, surrogates, truncated sequences).
std::u32string DecodeUtf8(std::string_view text);
std::string EncodeUtf8(std::u32string_view chars);
void AppendUtf8(char32_t c, std::string* out);

std::string ReadFile(const std::string& path);
// Writes to a temporary sibling file and renames it over `path`.
void AtomicWriteFile(const std::string& path, std::string_view contents);
bool FileExists(const std::string& path);
void MakeDirs(const std::string& path);

uint32_t Crc32(std::string_view data);
std::string Crc32Hex(std::string_view data);

// 64-bit mixing function (splitmix64 finalizer).
inline uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// mt19937_64 with distribution code that does not depend on the standard
// library vendor, so seeded outputs are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }
  // Uniform in [0, n). n must be > 0.
  uint64_t Uniform(uint64_t n);
  // Uniform in [0, 1).
  double UniformReal() { return (Next() >> 11) * 0x1.0p-53; }
  bool Bernoulli(double p) { return UniformReal() < p; }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = Uniform(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nerpipe

#endif  // NERPIPE_UTIL_H_
