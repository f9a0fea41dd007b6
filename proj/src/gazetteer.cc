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

#include "gazetteer.h"

#include <algorithm>
#include <numeric>

#include "json.hpp"
#include "status.h"
#include "util.h"

namespace nerpipe {

bool NameDictionary::Add(std::string surface, Provenance provenance,
                         std::string label) {
  if (surface.empty()) return false;
  if (DecodeUtf8(surface).size() < min_surface_len_) return false;
  if (index_.count(surface) != 0) return false;
  index_.emplace(surface, entries_.size());
  entries_.push_back({std::move(surface), provenance, std::move(label)});
  return true;
}

bool NameDictionary::Contains(std::string_view surface) const {
  return index_.count(std::string(surface)) != 0;
}

NameDictionary ParseDictionary(std::string_view contents,
                               std::size_t min_surface_len,
                               std::size_t* skipped) {
  NameDictionary dictionary(min_surface_len);
  std::size_t rejected = 0;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;
    std::string surface(line);
    std::string label = "COM";
    if (auto tab = line.find('\t'); tab != std::string_view::npos) {
      surface = std::string(line.substr(0, tab));
      label = std::string(line.substr(tab + 1));
      if (label.empty() || label.find_first_of(" \t") != std::string::npos) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(line_no) + ": invalid label",
                    line_no);
      }
    }
    try {
      if (!dictionary.Add(std::move(surface), Provenance::kOriginal, label)) {
        ++rejected;
      }
    } catch (const Error&) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": invalid UTF-8",
                  line_no);
    }
  }
  if (skipped != nullptr) *skipped = rejected;
  return dictionary;
}

NameDictionary LoadDictionary(const std::string& path,
                              std::size_t min_surface_len,
                              std::size_t* skipped) {
  return ParseDictionary(ReadFile(path), min_surface_len, skipped);
}

std::string SerializeDictionary(const NameDictionary& dictionary) {
  std::string out;
  for (const DictionaryEntry& e : dictionary.entries()) {
    out += e.surface;
    if (e.label != "COM") {
      out += '\t';
      out += e.label;
    }
    out += '\n';
  }
  return out;
}

std::vector<AbbreviationRule> DefaultAbbreviationRules() {
  using Kind = AbbreviationRule::Kind;
  std::vector<AbbreviationRule> rules;
  for (const char* suffix :
       {"集团股份有限公司", "股份有限公司", "有限责任公司", "集团有限公司",
        "有限公司", "集团", " Co., Ltd.", " Co.,Ltd.", " Inc.", " Corp.",
        " Ltd.", " LLC", " Holdings"}) {
    rules.push_back({Kind::kStripSuffix, suffix, 2});
  }
  rules.push_back({Kind::kStripPrefix, "中国", 2});
  return rules;
}

std::vector<AbbreviationRule> ParseAbbreviationRules(
    std::string_view contents) {
  std::vector<AbbreviationRule> rules;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": " + what, line_no);
    };
    if (fields.size() < 2 || fields.size() > 3) fail("expected 2 or 3 fields");
    AbbreviationRule rule;
    if (fields[0] == "suffix") {
      rule.kind = AbbreviationRule::Kind::kStripSuffix;
    } else if (fields[0] == "prefix") {
      rule.kind = AbbreviationRule::Kind::kStripPrefix;
    } else {
      fail("rule kind must be suffix or prefix");
    }
    rule.pattern = std::string(fields[1]);
    if (rule.pattern.empty()) fail("empty pattern");
    if (fields.size() == 3) {
      try {
        rule.min_remainder = std::stoul(std::string(fields[2]));
      } catch (const std::exception&) {
        fail("bad min_remainder");
      }
      if (rule.min_remainder < 2) fail("min_remainder must be >= 2");
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<std::string> GenerateAbbreviations(
    std::string_view name, const std::vector<AbbreviationRule>& rules) {
  std::vector<std::string> out;
  for (const AbbreviationRule& rule : rules) {
    if (rule.pattern.empty() || rule.pattern.size() >= name.size()) continue;
    std::string_view rest;
    if (rule.kind == AbbreviationRule::Kind::kStripSuffix) {
      if (name.substr(name.size() - rule.pattern.size()) != rule.pattern) {
        continue;
      }
      rest = name.substr(0, name.size() - rule.pattern.size());
    } else {
      if (name.substr(0, rule.pattern.size()) != rule.pattern) continue;
      rest = name.substr(rule.pattern.size());
    }
    std::u32string chars;
    try {
      chars = DecodeUtf8(rest);
    } catch (const Error&) {
      continue;  // pattern split a multi-byte character
    }
    if (chars.size() < rule.min_remainder) continue;
    std::string candidate(rest);
    if (candidate == name) continue;
    if (std::find(out.begin(), out.end(), candidate) != out.end()) continue;
    out.push_back(std::move(candidate));
  }
  return out;
}

std::size_t ExpandAbbreviations(NameDictionary* dictionary,
                                const std::vector<AbbreviationRule>& rules) {
  std::vector<DictionaryEntry> originals;
  for (const DictionaryEntry& e : dictionary->entries()) {
    if (e.provenance == Provenance::kOriginal) originals.push_back(e);
  }
  std::size_t added = 0;
  for (const DictionaryEntry& e : originals) {
    for (std::string& abbrev : GenerateAbbreviations(e.surface, rules)) {
      if (dictionary->Add(std::move(abbrev), Provenance::kAbbreviation,
                          e.label)) {
        ++added;
      }
    }
  }
  return added;
}

Matcher Matcher::Build(const NameDictionary& dictionary) {
  if (dictionary.empty()) {
    throw Error(ErrorCode::kEmptyDictionary, "dictionary is empty");
  }
  Matcher m;
  std::vector<std::u32string> surfaces;
  std::vector<int32_t> surface_label;
  surfaces.reserve(dictionary.size());
  for (const DictionaryEntry& e : dictionary.entries()) {
    surfaces.push_back(DecodeUtf8(e.surface));
    auto it = std::find(m.labels_.begin(), m.labels_.end(), e.label);
    if (it == m.labels_.end()) {
      m.labels_.push_back(e.label);
      it = m.labels_.end() - 1;
    }
    surface_label.push_back(static_cast<int32_t>(it - m.labels_.begin()));
  }
  std::vector<uint32_t> order(surfaces.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return surfaces[a] < surfaces[b];
  });

  // Insert in lexicographic order: new children of any node are created in
  // increasing character order, so a stable bucket by parent yields sorted
  // child blocks.
  struct Edge {
    uint32_t parent;
    char32_t c;
  };
  std::vector<Edge> created;  // created[k] describes node k + 1
  std::vector<uint32_t> depth{0};
  std::vector<int32_t> terminal{-1};
  std::vector<uint32_t> path{kRoot};
  const std::u32string* prev = nullptr;
  for (uint32_t idx : order) {
    const std::u32string& s = surfaces[idx];
    std::size_t lcp = 0;
    if (prev != nullptr) {
      while (lcp < s.size() && lcp < prev->size() && s[lcp] == (*prev)[lcp]) {
        ++lcp;
      }
    }
    path.resize(lcp + 1);
    for (std::size_t k = lcp; k < s.size(); ++k) {
      uint32_t node = static_cast<uint32_t>(depth.size());
      created.push_back({path.back(), s[k]});
      depth.push_back(static_cast<uint32_t>(k + 1));
      terminal.push_back(-1);
      path.push_back(node);
    }
    terminal[path.back()] = surface_label[idx];
    prev = &s;
  }
  surfaces.clear();
  surfaces.shrink_to_fit();

  const std::size_t n = depth.size();
  m.edge_offset_.assign(n + 1, 0);
  for (const Edge& e : created) ++m.edge_offset_[e.parent + 1];
  for (std::size_t i = 0; i < n; ++i) m.edge_offset_[i + 1] += m.edge_offset_[i];
  m.edge_char_.resize(created.size());
  m.edge_target_.resize(created.size());
  {
    std::vector<uint32_t> fill(m.edge_offset_.begin(), m.edge_offset_.end() - 1);
    for (std::size_t k = 0; k < created.size(); ++k) {
      uint32_t slot = fill[created[k].parent]++;
      m.edge_char_[slot] = created[k].c;
      m.edge_target_[slot] = static_cast<uint32_t>(k + 1);
    }
  }
  created.clear();
  created.shrink_to_fit();
  m.depth_ = std::move(depth);
  m.terminal_label_ = std::move(terminal);

  m.root_table_.assign(0x10000, kNone);
  for (uint32_t e = m.edge_offset_[0]; e < m.edge_offset_[1]; ++e) {
    if (m.edge_char_[e] < 0x10000) m.root_table_[m.edge_char_[e]] = m.edge_target_[e];
  }

  // Breadth-first failure links.
  m.fail_.assign(n, kRoot);
  m.dict_link_.assign(n, kNone);
  std::vector<uint32_t> queue;
  queue.reserve(n);
  queue.push_back(kRoot);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    uint32_t u = queue[head];
    for (uint32_t e = m.edge_offset_[u]; e < m.edge_offset_[u + 1]; ++e) {
      uint32_t v = m.edge_target_[e];
      char32_t c = m.edge_char_[e];
      uint32_t f = kRoot;
      if (u != kRoot) {
        uint32_t back = m.fail_[u];
        while (true) {
          uint32_t t = m.Goto(back, c);
          if (t != kNone) {
            f = t;
            break;
          }
          if (back == kRoot) break;
          back = m.fail_[back];
        }
      }
      m.fail_[v] = f;
      m.dict_link_[v] = m.terminal_label_[f] >= 0 ? f : m.dict_link_[f];
      queue.push_back(v);
    }
  }
  return m;
}

uint32_t Matcher::Goto(uint32_t node, char32_t c) const {
  if (node == kRoot && c < 0x10000) return root_table_[c];
  auto begin = edge_char_.begin() + edge_offset_[node];
  auto end = edge_char_.begin() + edge_offset_[node + 1];
  auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return kNone;
  return edge_target_[it - edge_char_.begin()];
}

uint32_t Matcher::Step(uint32_t state, char32_t c) const {
  while (true) {
    uint32_t t = Goto(state, c);
    if (t != kNone) return t;
    if (state == kRoot) return kRoot;
    state = fail_[state];
  }
}

template <typename Fn>
void Matcher::Scan(std::u32string_view text, Fn&& on_match) const {
  uint32_t state = kRoot;
  for (std::size_t j = 0; j < text.size(); ++j) {
    state = Step(state, text[j]);
    int end = static_cast<int>(j + 1);
    uint32_t node = terminal_label_[state] >= 0 ? state : dict_link_[state];
    for (; node != kNone; node = dict_link_[node]) {
      on_match(end - static_cast<int>(depth_[node]), end, terminal_label_[node]);
    }
  }
}

SpanList Matcher::FindAll(std::u32string_view text) const {
  SpanList out;
  Scan(text, [&](int start, int end, int32_t label) {
    out.push_back({start, end, labels_[label]});
  });
  std::sort(out.begin(), out.end());
  return out;
}

SpanList Matcher::Match(std::u32string_view text) const {
  std::vector<int> longest_end(text.size(), 0);
  std::vector<int32_t> longest_label(text.size(), -1);
  Scan(text, [&](int start, int end, int32_t label) {
    if (end > longest_end[start]) {
      longest_end[start] = end;
      longest_label[start] = label;
    }
  });
  SpanList out;
  for (std::size_t i = 0; i < text.size();) {
    if (longest_end[i] > 0) {
      out.push_back({static_cast<int>(i), longest_end[i],
                     labels_[longest_label[i]]});
      i = longest_end[i];
    } else {
      ++i;
    }
  }
  return out;
}

std::size_t Matcher::MemoryBytes() const {
  return edge_offset_.capacity() * 4 + edge_char_.capacity() * 4 +
         edge_target_.capacity() * 4 + root_table_.capacity() * 4 +
         fail_.capacity() * 4 + dict_link_.capacity() * 4 +
         depth_.capacity() * 4 + terminal_label_.capacity() * 4;
}

std::unique_ptr<ReplayAnnotator> ReplayAnnotator::Load(const std::string& path) {
  return Parse(ReadFile(path));
}

std::unique_ptr<ReplayAnnotator> ReplayAnnotator::Parse(
    std::string_view contents) {
  auto annotator = std::make_unique<ReplayAnnotator>();
  long line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      auto record = nlohmann::json::parse(line);
      SpanList spans;
      for (const auto& s : record.at("spans")) {
        spans.push_back({s.at("start").get<int>(), s.at("end").get<int>(),
                         s.value("label", std::string("COM"))});
      }
      annotator->spans_[record.at("id").get<std::string>()] = std::move(spans);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
  }
  return annotator;
}

SpanList ReplayAnnotator::Annotate(const Sentence& sentence) {
  auto it = spans_.find(sentence.id);
  if (it == spans_.end()) return {};
  return it->second;
}

Dataset AnnotateCorpus(const Dataset& input, const Matcher& matcher,
                       ExternalAnnotator* secondary, AnnotateStats* stats,
                       const std::string& layer) {
  AnnotateStats local;
  std::vector<SpanList> spans(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const Sentence& sentence = input.sentence(i);
    SpanList matched = matcher.Match(sentence.chars);
    local.matcher_spans += matched.size();
    if (secondary != nullptr) {
      SpanList extra;
      try {
        extra = secondary->Annotate(sentence);
        ValidateSpans(sentence.length(), extra);
      } catch (const std::exception& e) {
        local.warnings.push_back("sentence " + sentence.id +
                                 ": secondary annotator failed: " + e.what());
        extra.clear();
      }
      std::sort(extra.begin(), extra.end());
      SpanList merged = matched;
      for (const Span& s : extra) {
        bool clash = std::any_of(merged.begin(), merged.end(), [&](const Span& m) {
          return s.start < m.end && m.start < s.end;
        });
        if (!clash) {
          merged.push_back(s);
          ++local.secondary_spans;
        }
      }
      std::sort(merged.begin(), merged.end());
      matched = std::move(merged);
    }
    spans[i] = std::move(matched);
  }
  Dataset out = input;
  out.SetLayer(layer, std::move(spans));
  if (stats != nullptr) *stats = std::move(local);
  return out;
}

}  // namespace nerpipe
