// Copyright 2026 The mia-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "miaudit/corpus.h"

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "miaudit/error.h"
#include "miaudit/util.h"

namespace miaudit {

namespace {

constexpr std::string_view kOpenTag = "<section";
constexpr std::string_view kCloseTag = "</section>";
constexpr std::string_view kClosePrefix = "</section";

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsBlank(std::string_view text) {
  for (char c : text) {
    if (!IsSpace(c)) return false;
  }
  return true;
}

[[noreturn]] void Fail(std::size_t offset, const std::string& what) {
  throw Error(ErrorCode::kParse,
              "markup error at byte " + std::to_string(offset) + ": " + what);
}

// Finds the next "<section" that is followed by whitespace or '>', which is
// the only shape treated as an opening tag.
std::size_t FindOpenTag(std::string_view raw, std::size_t from) {
  while (true) {
    std::size_t at = raw.find(kOpenTag, from);
    if (at == std::string_view::npos) return at;
    std::size_t next = at + kOpenTag.size();
    if (next >= raw.size() || IsSpace(raw[next]) || raw[next] == '>') {
      return at;
    }
    from = at + 1;
  }
}

// Parses the attribute list of an opening tag starting right after
// "<section". Returns the section kind and advances pos past '>'.
SectionKind ParseOpenTag(std::string_view raw, std::size_t tag_start,
                         std::size_t& pos) {
  std::optional<SectionKind> kind;
  while (true) {
    while (pos < raw.size() && IsSpace(raw[pos])) ++pos;
    if (pos >= raw.size()) Fail(tag_start, "unterminated opening tag");
    if (raw[pos] == '>') {
      ++pos;
      break;
    }
    std::size_t name_start = pos;
    while (pos < raw.size() &&
           (std::isalnum(static_cast<unsigned char>(raw[pos])) ||
            raw[pos] == '_' || raw[pos] == '-')) {
      ++pos;
    }
    if (pos == name_start) Fail(pos, "malformed attribute in opening tag");
    std::string_view name = raw.substr(name_start, pos - name_start);
    if (pos + 1 >= raw.size() || raw[pos] != '=' || raw[pos + 1] != '"') {
      Fail(pos, "attribute value must be double-quoted");
    }
    pos += 2;
    std::size_t value_end = raw.find('"', pos);
    if (value_end == std::string_view::npos) {
      Fail(pos, "unterminated attribute value");
    }
    std::string_view value = raw.substr(pos, value_end - pos);
    if (name != "type") {
      Fail(name_start, "unsupported attribute '" + std::string(name) + "'");
    }
    if (kind) Fail(name_start, "duplicate type attribute");
    if (value == "structure") {
      kind = SectionKind::kStructural;
    } else if (value == "narrative") {
      kind = SectionKind::kNarrative;
    } else {
      Fail(pos, "unknown section type '" + std::string(value) + "'");
    }
    pos = value_end + 1;
  }
  if (!kind) Fail(tag_start, "section tag without type attribute");
  return *kind;
}

std::string_view TagType(SectionKind kind) {
  return kind == SectionKind::kStructural ? "structure" : "narrative";
}

}  // namespace

std::string_view SectionKindName(SectionKind kind) {
  return kind == SectionKind::kStructural ? "structural" : "narrative";
}

std::optional<std::size_t> FindInvalidUtf8(std::string_view text) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return i;
    }
    i += len;
  }
  return std::nullopt;
}

Document ParseSectionedDocument(std::string id, std::string_view raw) {
  if (raw.empty()) Fail(0, "empty input");
  if (auto bad = FindInvalidUtf8(raw)) Fail(*bad, "invalid UTF-8");

  Document doc;
  doc.id = std::move(id);
  doc.raw = std::string(raw);

  std::size_t first_open = FindOpenTag(raw, 0);
  std::size_t first_close = raw.find(kClosePrefix);
  if (first_open == std::string_view::npos) {
    if (first_close != std::string_view::npos) {
      Fail(first_close, "closing tag without opening tag");
    }
    doc.tagged = false;
    doc.sections.push_back(
        Section{SectionKind::kNarrative, std::string(raw), 0, {}});
    return doc;
  }

  doc.tagged = true;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = FindOpenTag(raw, pos);
    std::size_t stray_close = raw.find(kClosePrefix, pos);
    if (stray_close != std::string_view::npos &&
        (open == std::string_view::npos || stray_close < open)) {
      Fail(stray_close, "closing tag without opening tag");
    }
    std::string_view gap = raw.substr(
        pos, (open == std::string_view::npos ? raw.size() : open) - pos);
    if (!IsBlank(gap)) {
      std::size_t offset = pos;
      while (IsSpace(raw[offset])) ++offset;
      Fail(offset, "text outside of any section");
    }
    if (open == std::string_view::npos) {
      doc.trailing = std::string(gap);
      break;
    }
    std::size_t cursor = open + kOpenTag.size();
    SectionKind kind = ParseOpenTag(raw, open, cursor);
    std::size_t close = raw.find(kClosePrefix, cursor);
    std::size_t nested = FindOpenTag(raw, cursor);
    if (nested != std::string_view::npos &&
        (close == std::string_view::npos || nested < close)) {
      Fail(nested, "nested section tag");
    }
    if (close == std::string_view::npos) Fail(open, "unclosed section");
    if (raw.substr(close, kCloseTag.size()) != kCloseTag) {
      Fail(close, "malformed closing tag");
    }
    doc.sections.push_back(Section{kind,
                                   std::string(raw.substr(cursor, close - cursor)),
                                   doc.sections.size(), std::string(gap)});
    pos = close + kCloseTag.size();
  }
  return doc;
}

std::string SerializeDocument(const Document& doc) {
  if (!doc.tagged) return PlainText(doc);
  return ToMarkup(doc);
}

std::string ToMarkup(const Document& doc) {
  std::string out;
  for (const Section& s : doc.sections) {
    out += s.leading;
    out += "<section type=\"";
    out += TagType(s.kind);
    out += "\">";
    out += s.text;
    out += kCloseTag;
  }
  out += doc.trailing;
  return out;
}

std::string PlainText(const Document& doc) {
  std::string out;
  for (const Section& s : doc.sections) {
    out += s.leading;
    out += s.text;
  }
  out += doc.trailing;
  return out;
}

std::vector<std::string> NarrativeSpans(const Document& doc) {
  std::vector<std::string> spans;
  for (const Section& s : doc.sections) {
    if (s.kind == SectionKind::kNarrative) spans.push_back(s.text);
  }
  return spans;
}

std::string FlattenNarrative(const Document& doc) {
  std::string out;
  bool first = true;
  for (const Section& s : doc.sections) {
    if (s.kind != SectionKind::kNarrative) continue;
    if (!first) out += "\n\n";
    out += s.text;
    first = false;
  }
  return out;
}

Document MakeDocument(std::string id, std::vector<Section> sections) {
  Document doc;
  doc.id = std::move(id);
  doc.tagged = true;
  for (std::size_t i = 0; i < sections.size(); ++i) sections[i].index = i;
  doc.sections = std::move(sections);
  doc.raw = ToMarkup(doc);
  return doc;
}

std::string_view LabelName(Label label) {
  return label == Label::kMember ? "member" : "nonmember";
}

std::optional<Label> ParseLabel(std::string_view name) {
  if (name == "member") return Label::kMember;
  if (name == "nonmember") return Label::kNonmember;
  return std::nullopt;
}

std::size_t LabeledCorpus::Count(Label label) const {
  std::size_t n = 0;
  for (const auto& e : examples) n += e.label == label ? 1 : 0;
  return n;
}

const LabeledExample* LabeledCorpus::Find(std::string_view id) const {
  for (const auto& e : examples) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

LabeledCorpus ParseLabeledCorpus(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  LabeledCorpus corpus;
  std::unordered_set<std::string> seen;
  for (const JsonLine& line : ParseJsonLines(content, "corpus")) {
    const std::string where = "corpus line " + std::to_string(line.line_number);
    const nlohmann::json& v = line.value;
    if (!v.is_object() || !v.contains("id") || !v["id"].is_string() ||
        !v.contains("text") || !v["text"].is_string() ||
        !v.contains("label") || !v["label"].is_string()) {
      throw Error(ErrorCode::kSchema,
                  where + ": expected string fields id, text, label");
    }
    auto label = ParseLabel(v["label"].get<std::string>());
    if (!label) {
      throw Error(ErrorCode::kSchema, where + ": invalid label '" +
                                          v["label"].get<std::string>() + "'");
    }
    std::string id = v["id"].get<std::string>();
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": duplicate id '" + id + "'");
    }
    corpus.examples.push_back({std::move(id), v["text"].get<std::string>(), *label});
  }
  return corpus;
}

LabeledCorpus LoadLabeledCorpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus " + path);
  return ParseLabeledCorpus(in);
}

std::string LabeledCorpusToJsonl(const LabeledCorpus& corpus) {
  std::string out;
  for (const auto& e : corpus.examples) {
    nlohmann::json j = {{"id", e.id}, {"text", e.text},
                        {"label", std::string(LabelName(e.label))}};
    out += DumpLine(j);
  }
  return out;
}

}  // namespace miaudit
