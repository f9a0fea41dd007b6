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

// Name dictionary, abbreviation rules and a multi-pattern matcher used to
// machine-annotate raw sentences with entity spans.

#ifndef NERPIPE_GAZETTEER_H_
#define NERPIPE_GAZETTEER_H_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.h"

namespace nerpipe {

enum class Provenance { kOriginal, kAbbreviation };

struct DictionaryEntry {
  std::string surface;
  Provenance provenance = Provenance::kOriginal;
  std::string label = "COM";
};

class NameDictionary {
 public:
  explicit NameDictionary(std::size_t min_surface_len = 2)
      : min_surface_len_(min_surface_len) {}

  // Returns false and leaves the dictionary unchanged if the surface is
  // empty, shorter than min_surface_len, or already present.
  bool Add(std::string surface, Provenance provenance = Provenance::kOriginal,
           std::string label = "COM");

  bool Contains(std::string_view surface) const;
  const std::vector<DictionaryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t min_surface_len() const { return min_surface_len_; }

 private:
  std::size_t min_surface_len_;
  std::vector<DictionaryEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One surface per line, optional "\t<label>", '#' starts a comment line.
// `skipped` receives the number of rejected lines (too short, duplicate).
NameDictionary ParseDictionary(std::string_view contents,
                               std::size_t min_surface_len = 2,
                               std::size_t* skipped = nullptr);
NameDictionary LoadDictionary(const std::string& path,
                              std::size_t min_surface_len = 2,
                              std::size_t* skipped = nullptr);
std::string SerializeDictionary(const NameDictionary& dictionary);

struct AbbreviationRule {
  enum class Kind { kStripSuffix, kStripPrefix };
  Kind kind = Kind::kStripSuffix;
  std::string pattern;
  std::size_t min_remainder = 2;
};

// Legal-form suffixes (Chinese and English). Illustrative, not exhaustive.
std::vector<AbbreviationRule> DefaultAbbreviationRules();
// Lines of "suffix|prefix<TAB>pattern[<TAB>min_remainder]".
std::vector<AbbreviationRule> ParseAbbreviationRules(std::string_view contents);

// Each result comes from exactly one rule; remainders shorter than the rule's
// min_remainder (in characters) are dropped, duplicates and the input itself
// are removed. Order follows the rule list.
std::vector<std::string> GenerateAbbreviations(
    std::string_view name, const std::vector<AbbreviationRule>& rules);

// Adds abbreviations of every original entry. Returns the number added.
std::size_t ExpandAbbreviations(NameDictionary* dictionary,
                                const std::vector<AbbreviationRule>& rules);

// Aho-Corasick automaton over Unicode scalar values. Children of each trie
// node live in one sorted CSR block; root transitions for BMP characters go
// through a direct lookup table.
class Matcher {
 public:
  // Throws EmptyDictionaryError.
  static Matcher Build(const NameDictionary& dictionary);

  // Every occurrence of every surface, sorted by (start, end).
  SpanList FindAll(std::u32string_view text) const;
  // Leftmost-longest non-overlapping selection.
  SpanList Match(std::u32string_view text) const;

  std::size_t num_states() const { return fail_.size(); }
  std::size_t MemoryBytes() const;

 private:
  static constexpr uint32_t kNone = 0xFFFFFFFFu;
  static constexpr uint32_t kRoot = 0;

  uint32_t Goto(uint32_t node, char32_t c) const;
  uint32_t Step(uint32_t state, char32_t c) const;

  template <typename Fn>
  void Scan(std::u32string_view text, Fn&& on_match) const;

  std::vector<uint32_t> edge_offset_;
  std::vector<char32_t> edge_char_;
  std::vector<uint32_t> edge_target_;
  std::vector<uint32_t> root_table_;
  std::vector<uint32_t> fail_;
  std::vector<uint32_t> dict_link_;
  std::vector<uint32_t> depth_;
  std::vector<int32_t> terminal_label_;
  std::vector<std::string> labels_;
};

// Secondary annotator consulted for names the dictionary misses.
// Implementations throw to signal a per-sentence failure.
class ExternalAnnotator {
 public:
  virtual ~ExternalAnnotator() = default;
  virtual SpanList Annotate(const Sentence& sentence) = 0;
};

class NullAnnotator : public ExternalAnnotator {
 public:
  SpanList Annotate(const Sentence&) override { return {}; }
};

// Serves precomputed spans from JSON Lines of {"id": str, "spans": [...]}.
class ReplayAnnotator : public ExternalAnnotator {
 public:
  static std::unique_ptr<ReplayAnnotator> Load(const std::string& path);
  static std::unique_ptr<ReplayAnnotator> Parse(std::string_view contents);
  SpanList Annotate(const Sentence& sentence) override;

 private:
  std::unordered_map<std::string, SpanList> spans_;
};

struct AnnotateStats {
  std::size_t matcher_spans = 0;
  std::size_t secondary_spans = 0;
  std::vector<std::string> warnings;
};

// Copies `input` and adds `layer` with matcher spans plus any secondary spans
// that overlap neither a matcher span nor an earlier accepted secondary span.
// Secondary failures become warnings.
Dataset AnnotateCorpus(const Dataset& input, const Matcher& matcher,
                       ExternalAnnotator* secondary = nullptr,
                       AnnotateStats* stats = nullptr,
                       const std::string& layer = "coarse");

}  // namespace nerpipe

#endif  // NERPIPE_GAZETTEER_H_
