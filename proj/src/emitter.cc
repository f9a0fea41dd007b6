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

#include "emitter.h"

#include <cmath>

#include "json.hpp"
#include "status.h"
#include "util.h"

namespace nerpipe {

namespace {

constexpr char32_t kBeginSentinel = 0x110000;
constexpr char32_t kEndSentinel = 0x110001;

enum FeatureKind : uint64_t { kUnigram = 1, kBigram = 2, kParity = 3 };

inline char32_t CharAt(std::u32string_view chars, long pos) {
  if (pos < 0) return kBeginSentinel;
  if (pos >= static_cast<long>(chars.size())) return kEndSentinel;
  return chars[pos];
}

}  // namespace

EmitterConfig TeacherEmitterConfig() {
  EmitterConfig c;
  c.window = 3;
  c.hash_bits = 22;
  return c;
}

EmitterConfig StudentEmitterConfig() {
  EmitterConfig c;
  c.window = 1;
  c.hash_bits = 18;
  return c;
}

FeatureEmitter::FeatureEmitter(const EmitterConfig& config, int num_tags)
    : config_(config), num_tags_(num_tags) {
  if (config.window < 0 || config.window > 16) {
    throw Error(ErrorCode::kConfig, "emitter window must be in [0, 16]");
  }
  if (config.hash_bits < 1 || config.hash_bits > 28) {
    throw Error(ErrorCode::kConfig, "emitter hash_bits must be in [1, 28]");
  }
  if (num_tags <= 0) throw Error(ErrorCode::kConfig, "num_tags must be > 0");
  raw_.assign(dim() * num_tags, 0.0);
  const long w = config.window;
  const uint64_t seed = config.hash_seed;
  for (long off = -w; off <= w; ++off) {
    salts_.push_back(Mix64(seed ^ (kUnigram << 56) ^ static_cast<uint64_t>(off + 64)));
  }
  for (long off = -w; off < w; ++off) {
    salts_.push_back(Mix64(seed ^ (kBigram << 56) ^ static_cast<uint64_t>(off + 64)));
  }
  for (uint64_t parity = 0; parity < 2; ++parity) {
    salts_.push_back(Mix64(seed ^ (kParity << 56) ^ parity));
  }
}

void FeatureEmitter::ExtractFeaturesInto(std::u32string_view chars,
                                         std::size_t position,
                                         uint32_t* out) const {
  const uint64_t mask = dim() - 1;
  const long w = config_.window;
  const long p = static_cast<long>(position);
  const uint64_t* salt = salts_.data();
  std::size_t k = 0;
  for (long off = -w; off <= w; ++off) {
    out[k] = static_cast<uint32_t>(Mix64(salt[k] ^ CharAt(chars, p + off)) & mask);
    ++k;
  }
  for (long off = -w; off < w; ++off) {
    uint64_t h = Mix64(salt[k] ^ CharAt(chars, p + off));
    h = Mix64(h ^ CharAt(chars, p + off + 1));
    out[k++] = static_cast<uint32_t>(h & mask);
  }
  out[k] = static_cast<uint32_t>(salt[k + (position & 1)] & mask);
}

std::vector<uint32_t> FeatureEmitter::ExtractFeatures(
    std::u32string_view chars, std::size_t position) const {
  if (position >= chars.size()) {
    throw Error(ErrorCode::kRange, "feature position " +
                                       std::to_string(position) +
                                       " outside sentence of length " +
                                       std::to_string(chars.size()));
  }
  std::vector<uint32_t> ids(features_per_position());
  ExtractFeaturesInto(chars, position, ids.data());
  return ids;
}

EmissionTable FeatureEmitter::Emissions(std::u32string_view chars) const {
  EmissionTable table(chars.size(), num_tags_);
  const std::size_t nf = features_per_position();
  uint32_t ids[4 * 16 + 2];
  for (std::size_t i = 0; i < chars.size(); ++i) {
    ExtractFeaturesInto(chars, i, ids);
    double* row = table.row(i);
    for (std::size_t k = 0; k < nf; ++k) {
      const double* w = raw_.data() + std::size_t{ids[k]} * num_tags_;
      for (int y = 0; y < num_tags_; ++y) row[y] += w[y];
    }
    if (scale_ != 1.0) {
      for (int y = 0; y < num_tags_; ++y) row[y] *= scale_;
    }
  }
  return table;
}

void FeatureEmitter::ScaleWeights(double factor) {
  scale_ *= factor;
  if (scale_ < 1e-6) {
    for (double& w : raw_) w *= scale_;
    scale_ = 1.0;
  }
}

EmissionMap ParseExternalEmissions(std::string_view contents,
                                   const LabelScheme& scheme,
                                   const Dataset* target) {
  EmissionMap out;
  const std::size_t num_tags = scheme.num_tags();
  long line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::string id;
    std::vector<std::vector<double>> rows;
    try {
      auto record = nlohmann::json::parse(line);
      id = record.at("id").get<std::string>();
      rows = record.at("scores").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
    if (target != nullptr) {
      auto index = target->Find(id);
      if (!index) {
        throw Error(ErrorCode::kUnknownSentence,
                    "emissions for unknown sentence " + id);
      }
      if (rows.size() != target->sentence(*index).length()) {
        throw Error(ErrorCode::kShapeMismatch,
                    "sentence " + id + ": " + std::to_string(rows.size()) +
                        " emission rows for length " +
                        std::to_string(target->sentence(*index).length()));
      }
    }
    EmissionTable table(rows.size(), num_tags);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != num_tags) {
        throw Error(ErrorCode::kShapeMismatch,
                    "sentence " + id + ": row " + std::to_string(i) + " has " +
                        std::to_string(rows[i].size()) + " scores, expected " +
                        std::to_string(num_tags));
      }
      for (std::size_t y = 0; y < num_tags; ++y) {
        if (!std::isfinite(rows[i][y])) {
          throw Error(ErrorCode::kParse,
                      "sentence " + id + ": non-finite emission", line_no);
        }
        table(i, y) = rows[i][y];
      }
    }
    out[id] = std::move(table);
  }
  return out;
}

EmissionMap LoadExternalEmissions(const std::string& path,
                                  const LabelScheme& scheme,
                                  const Dataset* target) {
  return ParseExternalEmissions(ReadFile(path), scheme, target);
}

std::string SerializeExternalEmissions(const EmissionMap& emissions) {
  std::string out;
  for (const auto& [id, table] : emissions) {
    nlohmann::ordered_json record;
    record["id"] = id;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < table.rows(); ++i) {
      rows.push_back(std::vector<double>(table.row(i), table.row(i) + table.cols()));
    }
    record["scores"] = std::move(rows);
    out += record.dump();
    out += '\n';
  }
  return out;
}

}  // namespace nerpipe
