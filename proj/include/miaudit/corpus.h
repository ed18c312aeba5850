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
// Sectioned documents and labeled member/nonmember corpora.
//
// Document markup is a flat sequence of
//
//   <section type="structure">...</section>
//   <section type="narrative">...</section>
//
// elements. Bodies are kept byte-exactly; whitespace between elements is kept
// so that SerializeDocument reproduces the input. Input without any section
// tag becomes a single narrative section.

#ifndef MIAUDIT_CORPUS_H_
#define MIAUDIT_CORPUS_H_

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace miaudit {

enum class SectionKind { kStructural, kNarrative };

// "structural" / "narrative".
std::string_view SectionKindName(SectionKind kind);

struct Section {
  SectionKind kind = SectionKind::kNarrative;
  std::string text;
  std::size_t index = 0;
  // Whitespace that preceded the opening tag in the source markup.
  std::string leading;

  friend bool operator==(const Section&, const Section&) = default;
};

struct Document {
  std::string id;
  std::vector<Section> sections;
  std::string raw;
  // False when the source had no section tags (single-narrative fallback).
  bool tagged = false;
  // Whitespace after the last closing tag.
  std::string trailing;

  friend bool operator==(const Document&, const Document&) = default;
};

// Returns the byte offset of the first invalid UTF-8 sequence, if any.
std::optional<std::size_t> FindInvalidUtf8(std::string_view text);

// Throws Error{kParse} naming the byte offset of the problem.
Document ParseSectionedDocument(std::string id, std::string_view raw);

// Inverse of ParseSectionedDocument for well-formed input.
std::string SerializeDocument(const Document& doc);

// Always emits section tags, even for fallback documents. This is the form
// sent to a paraphraser.
std::string ToMarkup(const Document& doc);

// Section bodies and inter-section whitespace with the tags stripped.
std::string PlainText(const Document& doc);

std::vector<std::string> NarrativeSpans(const Document& doc);

// Narrative bodies joined by a single blank line.
std::string FlattenNarrative(const Document& doc);

// Builds a document whose sections are given directly (used when re-assembling
// paraphrases). Indices are renumbered.
Document MakeDocument(std::string id, std::vector<Section> sections);

enum class Label { kMember, kNonmember };

std::string_view LabelName(Label label);
std::optional<Label> ParseLabel(std::string_view name);

struct LabeledExample {
  std::string id;
  std::string text;
  Label label = Label::kNonmember;
};

struct LabeledCorpus {
  std::vector<LabeledExample> examples;

  std::size_t Count(Label label) const;
  bool HasBothLabels() const {
    return Count(Label::kMember) > 0 && Count(Label::kNonmember) > 0;
  }
  const LabeledExample* Find(std::string_view id) const;
};

// One JSON object per line with string fields id, text and label. Blank lines
// are skipped. Errors carry the 1-based line number.
LabeledCorpus ParseLabeledCorpus(std::istream& in);
LabeledCorpus LoadLabeledCorpus(const std::string& path);

std::string LabeledCorpusToJsonl(const LabeledCorpus& corpus);

}  // namespace miaudit

#endif  // MIAUDIT_CORPUS_H_
