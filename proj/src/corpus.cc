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

#include "corpus.h"

#include <algorithm>
#include <cstdio>

#include "json.hpp"
#include "status.h"
#include "util.h"

namespace nerpipe {

namespace {

bool ValidLabel(std::string_view label) {
  if (label.empty()) return false;
  for (char c : label) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  }
  return true;
}

std::string SpanText(const Span& s) {
  return "(" + std::to_string(s.start) + "," + std::to_string(s.end) + "," +
         s.label + ")";
}

void ValidateSpansImpl(std::size_t length, const SpanList& spans,
                       const LabelScheme* scheme) {
  SpanList sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Span& s = sorted[i];
    if (s.start < 0 || s.end <= s.start ||
        static_cast<std::size_t>(s.end) > length) {
      throw Error(ErrorCode::kRange, "span " + SpanText(s) +
                                         " outside sentence of length " +
                                         std::to_string(length));
    }
    if (scheme != nullptr ? scheme->LabelIndex(s.label) < 0
                          : !ValidLabel(s.label)) {
      throw Error(ErrorCode::kUnknownLabel, "unknown label '" + s.label + "'");
    }
    if (i > 0 && sorted[i - 1].end > s.start) {
      throw Error(ErrorCode::kOverlap, "spans " + SpanText(sorted[i - 1]) +
                                           " and " + SpanText(s) +
                                           " overlap");
    }
  }
}

// Sorts and drops invalid spans. Returns the number dropped.
std::size_t RepairSpans(std::size_t length, SpanList* spans) {
  std::sort(spans->begin(), spans->end());
  SpanList kept;
  int last_end = 0;
  for (Span& s : *spans) {
    if (s.start < 0 || s.end <= s.start ||
        static_cast<std::size_t>(s.end) > length || !ValidLabel(s.label) ||
        s.start < last_end) {
      continue;
    }
    last_end = s.end;
    kept.push_back(std::move(s));
  }
  std::size_t dropped = spans->size() - kept.size();
  *spans = std::move(kept);
  return dropped;
}

// Parses "O", "B-x", "I-x". Returns false for anything else.
bool ParseTag(std::string_view tag, char* kind, std::string_view* label) {
  if (tag == "O") {
    *kind = 'O';
    return true;
  }
  if (tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    *kind = tag[0];
    *label = tag.substr(2);
    return true;
  }
  return false;
}

}  // namespace

LabelScheme::LabelScheme(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "label scheme must be non-empty");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!ValidLabel(labels_[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "invalid label '" + labels_[i] + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (labels_[i] == labels_[j]) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate label '" + labels_[i] + "'");
      }
    }
  }
}

int LabelScheme::LabelIndex(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<int>(i);
  }
  return -1;
}

std::string LabelScheme::TagName(int tag) const {
  if (tag == kOutside) return "O";
  return std::string(IsBegin(tag) ? "B-" : "I-") + labels_[LabelOf(tag)];
}

int LabelScheme::TagIndex(std::string_view name) const {
  char kind;
  std::string_view label;
  if (!ParseTag(name, &kind, &label)) return -1;
  if (kind == 'O') return kOutside;
  int l = LabelIndex(label);
  if (l < 0) return -1;
  return kind == 'B' ? BeginTag(l) : InsideTag(l);
}

Sentence Sentence::Make(std::string id, std::string text) {
  Sentence s;
  s.chars = DecodeUtf8(text);
  s.id = std::move(id);
  s.text = std::move(text);
  return s;
}

std::vector<Sentence> SplitSentences(std::string_view text,
                                     const SplitOptions& options) {
  std::u32string chars = DecodeUtf8(text);
  std::vector<Sentence> out;
  std::u32string current;
  auto flush = [&] {
    if (current.empty()) return;
    char id[32];
    std::snprintf(id, sizeof(id), "%06zu", out.size() + 1);
    Sentence s;
    s.id = options.id_prefix + id;
    s.text = EncodeUtf8(current);
    s.chars = std::move(current);
    out.push_back(std::move(s));
    current.clear();
  };
  for (char32_t c : chars) {
    current.push_back(c);
    if (options.delimiters.find(c) != std::u32string::npos) flush();
  }
  flush();
  return out;
}

void ValidateSpans(std::size_t length, const SpanList& spans,
                   const LabelScheme& scheme) {
  ValidateSpansImpl(length, spans, &scheme);
}

void ValidateSpans(std::size_t length, const SpanList& spans) {
  ValidateSpansImpl(length, spans, nullptr);
}

TagSequence SpansToTags(std::size_t length, const SpanList& spans,
                        const LabelScheme& scheme) {
  ValidateSpans(length, spans, scheme);
  TagSequence tags(length, LabelScheme::kOutside);
  for (const Span& s : spans) {
    int label = scheme.LabelIndex(s.label);
    tags[s.start] = scheme.BeginTag(label);
    for (int i = s.start + 1; i < s.end; ++i) tags[i] = scheme.InsideTag(label);
  }
  return tags;
}

SpanList TagsToSpans(const TagSequence& tags, const LabelScheme& scheme) {
  SpanList spans;
  int open_label = -1;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    int tag = tags[i];
    bool continues = LabelScheme::IsInside(tag) &&
                     LabelScheme::LabelOf(tag) == open_label;
    if (continues) {
      spans.back().end = static_cast<int>(i) + 1;
      continue;
    }
    open_label = -1;
    if (tag != LabelScheme::kOutside) {
      open_label = LabelScheme::LabelOf(tag);
      spans.push_back({static_cast<int>(i), static_cast<int>(i) + 1,
                       scheme.labels()[open_label]});
    }
  }
  return spans;
}

SpanList TagsToSpans(const std::vector<std::string>& tags) {
  SpanList spans;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    char kind;
    std::string_view label;
    if (!ParseTag(tags[i], &kind, &label) || kind == 'O') {
      open = false;
      continue;
    }
    if (kind == 'I' && open && spans.back().label == label) {
      spans.back().end = static_cast<int>(i) + 1;
      continue;
    }
    spans.push_back({static_cast<int>(i), static_cast<int>(i) + 1,
                     std::string(label)});
    open = true;
  }
  return spans;
}

void Dataset::AddSentence(Sentence sentence) {
  if (index_.count(sentence.id) != 0) {
    throw Error(ErrorCode::kInvariant, "duplicate sentence id " + sentence.id);
  }
  index_.emplace(sentence.id, sentences_.size());
  sentences_.push_back(std::move(sentence));
  for (auto& [name, spans] : layers_) spans.emplace_back();
}

std::optional<std::size_t> Dataset::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Dataset::HasLayer(const std::string& name) const {
  return layers_.count(name) != 0;
}

std::vector<std::string> Dataset::LayerNames() const {
  std::vector<std::string> names;
  for (const auto& [name, spans] : layers_) names.push_back(name);
  return names;
}

const std::vector<SpanList>& Dataset::layer(const std::string& name) const {
  auto it = layers_.find(name);
  if (it == layers_.end()) {
    throw Error(ErrorCode::kData, "dataset has no layer '" + name + "'");
  }
  return it->second;
}

void Dataset::SetLayer(const std::string& name, std::vector<SpanList> spans) {
  if (spans.size() != sentences_.size()) {
    throw Error(ErrorCode::kInvariant,
                "layer '" + name + "' has " + std::to_string(spans.size()) +
                    " entries for " + std::to_string(sentences_.size()) +
                    " sentences");
  }
  for (std::size_t i = 0; i < spans.size(); ++i) {
    ValidateSpans(sentences_[i].length(), spans[i]);
    std::sort(spans[i].begin(), spans[i].end());
  }
  layers_[name] = std::move(spans);
}

void Dataset::SetSpans(const std::string& name, std::size_t index,
                       SpanList spans) {
  auto it = layers_.find(name);
  if (it == layers_.end()) {
    it = layers_.emplace(name, std::vector<SpanList>(sentences_.size())).first;
  }
  ValidateSpans(sentences_.at(index).length(), spans);
  std::sort(spans.begin(), spans.end());
  it->second[index] = std::move(spans);
}

void Dataset::RemoveLayer(const std::string& name) { layers_.erase(name); }

std::string SerializeJsonl(const Dataset& dataset) {
  std::string out;
  std::vector<std::string> names = dataset.LayerNames();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Sentence& s = dataset.sentence(i);
    nlohmann::ordered_json record;
    record["id"] = s.id;
    record["text"] = s.text;
    nlohmann::ordered_json layers = nlohmann::ordered_json::object();
    for (const std::string& name : names) {
      nlohmann::ordered_json spans = nlohmann::ordered_json::array();
      for (const Span& span : dataset.layer(name)[i]) {
        spans.push_back(nlohmann::ordered_json{
            {"start", span.start}, {"end", span.end}, {"label", span.label}});
      }
      layers[name] = std::move(spans);
    }
    record["layers"] = std::move(layers);
    out += record.dump();
    out += '\n';
  }
  return out;
}

Dataset ParseJsonl(std::string_view contents, const LoadOptions& options,
                   std::size_t* repaired) {
  Dataset dataset;
  std::map<std::string, std::vector<SpanList>> layers;
  std::size_t fixes = 0;
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
    std::string text;
    std::map<std::string, SpanList> record_layers;
    try {
      auto record = nlohmann::json::parse(line);
      id = record.at("id").get<std::string>();
      text = record.at("text").get<std::string>();
      if (record.contains("layers")) {
        for (const auto& [name, spans] : record.at("layers").items()) {
          SpanList list;
          for (const auto& s : spans) {
            list.push_back({s.at("start").get<int>(), s.at("end").get<int>(),
                            s.at("label").get<std::string>()});
          }
          record_layers[name] = std::move(list);
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
    Sentence sentence;
    try {
      sentence = Sentence::Make(id, text);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
    for (auto& [name, spans] : record_layers) {
      if (options.repair) {
        fixes += RepairSpans(sentence.length(), &spans);
      } else {
        try {
          ValidateSpans(sentence.length(), spans);
        } catch (const Error& e) {
          throw Error(ErrorCode::kInvariant,
                      "line " + std::to_string(line_no) + ": " + e.what(),
                      line_no);
        }
        std::sort(spans.begin(), spans.end());
      }
    }
    std::size_t index = dataset.size();
    try {
      dataset.AddSentence(std::move(sentence));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
    for (auto& [name, spans] : record_layers) {
      auto& layer = layers[name];
      layer.resize(index + 1);
      layer[index] = std::move(spans);
    }
  }
  for (auto& [name, spans] : layers) {
    spans.resize(dataset.size());
    dataset.SetLayer(name, std::move(spans));
  }
  if (repaired != nullptr) *repaired = fixes;
  return dataset;
}

namespace {

std::string EscapeToken(char32_t c) {
  switch (c) {
    case U'\n': return "\\n";
    case U'\t': return "\\t";
    case U'\r': return "\\r";
    case U'\\': return "\\\\";
    default: {
      std::string s;
      AppendUtf8(c, &s);
      return s;
    }
  }
}

std::string UnescapeToken(std::string_view token) {
  if (token == "\\n") return "\n";
  if (token == "\\t") return "\t";
  if (token == "\\r") return "\r";
  if (token == "\\\\") return "\\";
  return std::string(token);
}

constexpr std::string_view kIdPrefix = "# id = ";

}  // namespace

std::string SerializeColumn(const Dataset& dataset) {
  std::vector<std::string> names = dataset.LayerNames();
  if (names.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "column format requires exactly one layer, dataset has " +
                    std::to_string(names.size()));
  }
  const auto& layer = dataset.layer(names[0]);
  std::string out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Sentence& s = dataset.sentence(i);
    std::vector<std::string> tags(s.length(), "O");
    for (const Span& span : layer[i]) {
      tags[span.start] = "B-" + span.label;
      for (int k = span.start + 1; k < span.end; ++k) tags[k] = "I-" + span.label;
    }
    out += kIdPrefix;
    out += s.id;
    out += '\n';
    for (std::size_t k = 0; k < s.length(); ++k) {
      out += EscapeToken(s.chars[k]);
      out += '\t';
      out += tags[k];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

Dataset ParseColumn(std::string_view contents, const LoadOptions& options,
                    std::size_t* repaired) {
  Dataset dataset;
  std::vector<SpanList> layer;
  std::size_t fixes = 0;
  std::string pending_id;
  bool have_id = false;
  std::string text;
  std::vector<std::string> tags;
  long line_no = 0;
  long sentence_line = 0;

  auto flush = [&] {
    if (tags.empty() && !have_id) return;
    std::string id = have_id ? pending_id : "s" + std::to_string(dataset.size() + 1);
    SpanList spans = TagsToSpans(tags);
    // Well-formed iff re-encoding yields the same tag strings.
    std::vector<std::string> canonical(tags.size(), "O");
    for (const Span& s : spans) {
      canonical[s.start] = "B-" + s.label;
      for (int k = s.start + 1; k < s.end; ++k) canonical[k] = "I-" + s.label;
    }
    if (canonical != tags) {
      if (!options.repair) {
        throw Error(ErrorCode::kInvariant,
                    "malformed tag sequence in sentence starting at line " +
                        std::to_string(sentence_line),
                    sentence_line);
      }
      ++fixes;
    }
    try {
      dataset.AddSentence(Sentence::Make(id, text));
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), sentence_line);
    }
    layer.push_back(std::move(spans));
    text.clear();
    tags.clear();
    have_id = false;
  };

  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.substr(0, kIdPrefix.size()) == kIdPrefix &&
        line.find('\t') == std::string_view::npos) {
      if (!tags.empty() || have_id) flush();
      pending_id = std::string(line.substr(kIdPrefix.size()));
      have_id = true;
      sentence_line = line_no;
      continue;
    }
    std::size_t sep = line.rfind('\t');
    if (sep == std::string_view::npos) sep = line.rfind(' ');
    if (sep == std::string_view::npos || sep == 0) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": expected token and tag",
                  line_no);
    }
    std::string token = UnescapeToken(line.substr(0, sep));
    std::u32string decoded;
    try {
      decoded = DecodeUtf8(token);
    } catch (const Error&) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": invalid UTF-8",
                  line_no);
    }
    if (decoded.size() != 1) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) +
                      ": token must be a single character",
                  line_no);
    }
    if (tags.empty() && !have_id) sentence_line = line_no;
    text += token;
    tags.emplace_back(line.substr(sep + 1));
  }
  flush();
  dataset.SetLayer(options.column_layer, std::move(layer));
  if (repaired != nullptr) *repaired = fixes;
  return dataset;
}

Dataset LoadDataset(const std::string& path, DatasetFormat format,
                    const LoadOptions& options, std::size_t* repaired) {
  std::string contents = ReadFile(path);
  return format == DatasetFormat::kJsonl
             ? ParseJsonl(contents, options, repaired)
             : ParseColumn(contents, options, repaired);
}

void SaveDataset(const Dataset& dataset, const std::string& path,
                 DatasetFormat format) {
  AtomicWriteFile(path, format == DatasetFormat::kJsonl
                            ? SerializeJsonl(dataset)
                            : SerializeColumn(dataset));
}

DatasetFormat ParseFormat(std::string_view name) {
  if (name == "jsonl") return DatasetFormat::kJsonl;
  if (name == "column") return DatasetFormat::kColumn;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown dataset format '" + std::string(name) + "'");
}

DatasetFormat SniffFormat(std::string_view contents) {
  const std::size_t first = contents.find_first_not_of(" \t\r\n");
  return first != std::string_view::npos && contents[first] == '{'
             ? DatasetFormat::kJsonl
             : DatasetFormat::kColumn;
}

}  // namespace nerpipe
