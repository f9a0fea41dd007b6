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

// Emission models: per-position, per-tag scores consumed by the CRF.
//
// FeatureEmitter is a linear model over hashed character-window features:
// for position i it extracts the unigrams in [i - w, i + w] (with boundary
// sentinels), the adjacent bigrams inside that window and a position-parity
// feature, hashes each into [0, 2^hash_bits) and sums the weight rows.
// Emissions computed offline by any other encoder can be imported instead.

#ifndef NERPIPE_EMITTER_H_
#define NERPIPE_EMITTER_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.h"

namespace nerpipe {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// e(i, y): sentence length x number of tags.
using EmissionTable = Matrix;

struct EmitterConfig {
  int window = 2;
  int hash_bits = 20;
  uint64_t hash_seed = 0x6e65727069706531ULL;

  bool operator==(const EmitterConfig&) const = default;
};

// Larger window and feature space: slower, stronger.
EmitterConfig TeacherEmitterConfig();
EmitterConfig StudentEmitterConfig();

class FeatureEmitter {
 public:
  FeatureEmitter() = default;
  FeatureEmitter(const EmitterConfig& config, int num_tags);

  const EmitterConfig& config() const { return config_; }
  int num_tags() const { return num_tags_; }
  std::size_t dim() const { return std::size_t{1} << config_.hash_bits; }
  std::size_t features_per_position() const { return 4 * config_.window + 2; }

  // Throws RangeError when position is outside the sentence.
  std::vector<uint32_t> ExtractFeatures(std::u32string_view chars,
                                        std::size_t position) const;
  // Fills `out` (resized to features_per_position()) without range checks.
  void ExtractFeaturesInto(std::u32string_view chars, std::size_t position,
                           uint32_t* out) const;

  EmissionTable Emissions(std::u32string_view chars) const;

  double weight(uint32_t feature, int tag) const {
    return scale_ * raw_[std::size_t{feature} * num_tags_ + tag];
  }
  void set_weight(uint32_t feature, int tag, double value) {
    raw_[std::size_t{feature} * num_tags_ + tag] = value / scale_;
  }
  void AddToWeight(uint32_t feature, int tag, double delta) {
    raw_[std::size_t{feature} * num_tags_ + tag] += delta / scale_;
  }
  // Multiplies every weight by `factor` in O(1); folds the scale back into
  // the raw weights when it gets small.
  void ScaleWeights(double factor);

  // Serialization access. Effective weight = scale * raw.
  double scale() const { return scale_; }
  const std::vector<double>& raw_weights() const { return raw_; }
  std::vector<double>& mutable_raw_weights() { return raw_; }
  void set_scale(double scale) { scale_ = scale; }

  bool operator==(const FeatureEmitter&) const = default;

 private:
  EmitterConfig config_;
  int num_tags_ = 0;
  double scale_ = 1.0;
  std::vector<double> raw_;
  // Per-offset hash prefixes: unigrams, then bigrams, then the two parities.
  std::vector<uint64_t> salts_;
};

// External emissions: JSON Lines of {"id": str, "scores": [[...], ...]} with
// one row per character and columns in the scheme's tag order.
using EmissionMap = std::map<std::string, EmissionTable>;

// When `target` is given every table must have one row per character of the
// sentence with the same id. Throws ShapeMismatchError naming the id.
EmissionMap ParseExternalEmissions(std::string_view contents,
                                   const LabelScheme& scheme,
                                   const Dataset* target = nullptr);
EmissionMap LoadExternalEmissions(const std::string& path,
                                  const LabelScheme& scheme,
                                  const Dataset* target = nullptr);
std::string SerializeExternalEmissions(const EmissionMap& emissions);

}  // namespace nerpipe

#endif  // NERPIPE_EMITTER_H_
