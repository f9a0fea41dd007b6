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

// Sentences, spans, BIO tag sequences and datasets.
//
// All positions are indices into the sequence of Unicode scalar values of a
// sentence, never byte offsets. A span is the half-open interval
// [start, end) with an entity label; a dataset carries any number of named
// span layers ("gold", "coarse", "predicted", "corrected", "pseudo"), each
// holding one span list per sentence.

#ifndef NERPIPE_CORPUS_H_
#define NERPIPE_CORPUS_H_

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nerpipe {

struct Span {
  int start = 0;
  int end = 0;
  std::string label;

  auto operator<=>(const Span&) const = default;
};

using SpanList = std::vector<Span>;

// Tag indices: 0 is O; label k owns B = 1 + 2k and I = 2 + 2k.
using TagSequence = std::vector<int>;

class LabelScheme {
 public:
  static constexpr int kOutside = 0;

  LabelScheme() : LabelScheme(std::vector<std::string>{"COM"}) {}
  explicit LabelScheme(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  int num_tags() const { return static_cast<int>(2 * labels_.size() + 1); }

  // -1 when unknown.
  int LabelIndex(std::string_view label) const;
  int BeginTag(int label) const { return 1 + 2 * label; }
  int InsideTag(int label) const { return 2 + 2 * label; }
  static bool IsBegin(int tag) { return tag > 0 && tag % 2 == 1; }
  static bool IsInside(int tag) { return tag > 0 && tag % 2 == 0; }
  // Label index of a B/I tag.
  static int LabelOf(int tag) { return (tag - 1) / 2; }

  std::string TagName(int tag) const;
  // -1 for strings that are not O/B-x/I-x with x in the scheme.
  int TagIndex(std::string_view name) const;

  bool operator==(const LabelScheme& other) const {
    return labels_ == other.labels_;
  }

 private:
  std::vector<std::string> labels_;
};

struct Sentence {
  std::string id;
  std::string text;     // UTF-8
  std::u32string chars;  // decoded scalar values of `text`

  static Sentence Make(std::string id, std::string text);
  std::size_t length() const { return chars.size(); }

  bool operator==(const Sentence& o) const {
    return id == o.id && text == o.text;
  }
};

struct SplitOptions {
  std::u32string delimiters = U"。！？；\n";
  std::string id_prefix = "s";
};

// Splits on the delimiter set, keeping each delimiter attached to the
// sentence it ends. Ids are `id_prefix` followed by a 1-based counter.
std::vector<Sentence> SplitSentences(std::string_view text,
                                     const SplitOptions& options = {});

// Throws OverlapError, RangeError or UnknownLabelError.
void ValidateSpans(std::size_t length, const SpanList& spans,
                   const LabelScheme& scheme);
// Same checks without a scheme: labels must be non-empty, whitespace-free.
void ValidateSpans(std::size_t length, const SpanList& spans);

TagSequence SpansToTags(std::size_t length, const SpanList& spans,
                        const LabelScheme& scheme);

// Maximal B-I runs. A stray I-x that does not continue an x entity starts a
// new one, as if it were B-x.
SpanList TagsToSpans(const TagSequence& tags, const LabelScheme& scheme);
// String form; accepts any label and treats unparseable tags as O.
SpanList TagsToSpans(const std::vector<std::string>& tags);

class Dataset {
 public:
  void AddSentence(Sentence sentence);

  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  const Sentence& sentence(std::size_t i) const { return sentences_[i]; }
  const std::vector<Sentence>& sentences() const { return sentences_; }
  std::optional<std::size_t> Find(std::string_view id) const;

  bool HasLayer(const std::string& name) const;
  std::vector<std::string> LayerNames() const;
  // Throws DataError when the layer is missing.
  const std::vector<SpanList>& layer(const std::string& name) const;
  // Validates every span list against its sentence; throws InvariantError
  // (or the span-specific error) on violation.
  void SetLayer(const std::string& name, std::vector<SpanList> spans);
  void SetSpans(const std::string& name, std::size_t index, SpanList spans);
  void RemoveLayer(const std::string& name);

  bool operator==(const Dataset& other) const {
    return sentences_ == other.sentences_ && layers_ == other.layers_;
  }

 private:
  std::vector<Sentence> sentences_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<SpanList>> layers_;
};

enum class DatasetFormat { kJsonl, kColumn };

struct LoadOptions {
  // Drop out-of-range/overlapping spans and repair malformed tags instead of
  // failing with InvariantError.
  bool repair = true;
  // Layer name given to the single layer of a column file.
  std::string column_layer = "gold";
};

// Canonical form: one object per line with keys id, text, layers; layers in
// name order, every layer present on every sentence, spans sorted.
std::string SerializeJsonl(const Dataset& dataset);
Dataset ParseJsonl(std::string_view contents, const LoadOptions& options = {},
                   std::size_t* repaired = nullptr);

// Tab-separated token/tag lines, blank line between sentences. Each sentence
// is preceded by a "# id = <id>" line so ids survive a round trip. Requires a
// dataset with exactly one layer.
std::string SerializeColumn(const Dataset& dataset);
Dataset ParseColumn(std::string_view contents,
                    const LoadOptions& options = {},
                    std::size_t* repaired = nullptr);

Dataset LoadDataset(const std::string& path, DatasetFormat format,
                    const LoadOptions& options = {},
                    std::size_t* repaired = nullptr);
void SaveDataset(const Dataset& dataset, const std::string& path,
                 DatasetFormat format);
DatasetFormat ParseFormat(std::string_view name);
// JSON Lines if the first non-blank byte is '{', column otherwise.
DatasetFormat SniffFormat(std::string_view contents);

}  // namespace nerpipe

#endif  // NERPIPE_CORPUS_H_
