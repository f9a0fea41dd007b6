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

// Reproducible synthetic corpora: company-style names composed from shared
// syllable, industry and legal-form pools, dropped into carrier sentences.
// The emitted dictionary covers a configurable fraction of the names, and
// the machine-annotated "coarse" layer gets optional boundary noise.

#ifndef NERPIPE_SYNTH_H_
#define NERPIPE_SYNTH_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "corpus.h"
#include "gazetteer.h"
#include "json.hpp"

namespace nerpipe {

struct NameGrammar {
  std::vector<std::string> syllables;
  int min_syllables = 2;
  int max_syllables = 3;
  std::vector<std::string> industry_words;
  double industry_prob = 0.85;
  std::vector<std::string> suffixes;
};

struct SynthConfig {
  std::size_t n_sentences = 10000;
  std::size_t n_names = 1000;
  double dict_coverage = 0.6;
  double boundary_noise = 0.05;
  // Extra label-free sentences for distillation.
  std::size_t n_unlabeled = 20000;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
  std::string label = "COM";
  NameGrammar name_grammar;
  // "{}" marks an entity slot.
  std::vector<std::string> carrier_templates;
  uint64_t seed = 1;

  // Default pools (Chinese financial-news flavoured).
  static SynthConfig Defaults();
  // Unspecified keys keep their default. Throws ConfigError.
  static SynthConfig FromJson(const nlohmann::json& json);
  nlohmann::ordered_json ToJson() const;
  void Validate() const;
};

struct SynthCorpus {
  Dataset train;      // layers "gold" and "coarse"
  Dataset dev;        // layer "gold"
  Dataset test;       // layer "gold"
  Dataset unlabeled;  // no layers
  NameDictionary dictionary;
  std::vector<std::string> names;  // every generated name
};

SynthCorpus GenerateCorpus(const SynthConfig& config);

// Writes train/dev/test/unlabeled .jsonl, dict.txt, names.txt and
// synth_config.json. Returns (file name, CRC-32 hex) pairs.
std::vector<std::pair<std::string, std::string>> WriteCorpus(
    const SynthCorpus& corpus, const SynthConfig& config,
    const std::string& out_dir);

}  // namespace nerpipe

#endif  // NERPIPE_SYNTH_H_
