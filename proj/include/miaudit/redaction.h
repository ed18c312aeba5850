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
// Factual-anchor extraction and deterministic <<FACT_i>> substitution.

#ifndef MIAUDIT_REDACTION_H_
#define MIAUDIT_REDACTION_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "miaudit/corpus.h"
#include "miaudit/http.h"

namespace miaudit {

enum class FactKind { kEntity, kNumber, kDate };

std::string_view FactKindName(FactKind kind);
std::optional<FactKind> ParseFactKind(std::string_view name);

struct FactualAnchor {
  std::string value;
  FactKind kind = FactKind::kEntity;
  std::optional<std::string> notes;

  friend bool operator==(const FactualAnchor&, const FactualAnchor&) = default;
};

struct PlaceholderAssignment {
  FactualAnchor anchor;
  std::string placeholder;  // "<<FACT_i>>"
  // First claimed byte offset in the prose the plan was built from.
  std::size_t first_offset = 0;

  friend bool operator==(const PlaceholderAssignment&,
                         const PlaceholderAssignment&) = default;
};

struct RedactionPlan {
  std::vector<PlaceholderAssignment> assignments;

  friend bool operator==(const RedactionPlan&, const RedactionPlan&) = default;
};

struct MaskSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const MaskSpan&, const MaskSpan&) = default;
};

struct RedactedDocument {
  std::string id;
  std::string text;
  std::vector<MaskSpan> mask_spans;
  RedactionPlan plan;
};

std::string Placeholder(std::size_t index);

// Tagger responses are raw text that must parse as a JSON array of
// {value, type, notes?} objects.
class FactTagger {
 public:
  virtual ~FactTagger() = default;
  // attempt is 1-based; later attempts are re-prompts after a schema failure.
  virtual std::string Tag(const Document& doc, std::string_view narrative,
                          int attempt) = 0;
};

// Replays {id, attempt?, response} records. response is either the raw reply
// string or a JSON value that is re-serialized.
class ScriptedTagger final : public FactTagger {
 public:
  explicit ScriptedTagger(const std::string& path);
  ScriptedTagger(std::string_view content, std::string_view source_name);

  std::string Tag(const Document& doc, std::string_view narrative,
                  int attempt) override;

 private:
  std::map<std::pair<std::string, int>, std::string> script_;
};

extern const std::string_view kTaggerSystemPrompt;

class ChatTagger final : public FactTagger {
 public:
  explicit ChatTagger(ServiceEndpoint endpoint, RetryPolicy retry = {})
      : endpoint_(std::move(endpoint)), retry_(retry) {}

  std::string Tag(const Document& doc, std::string_view narrative,
                  int attempt) override;

 private:
  ServiceEndpoint endpoint_;
  RetryPolicy retry_;
};

// Strict schema check of one tagger reply. Anchors whose value contains "<<"
// are dropped and reported through warnings. Throws Error{kSchema}.
std::vector<FactualAnchor> ParseTaggerResponse(std::string_view response,
                                               std::vector<std::string>* warnings);

// Calls the tagger until a reply validates, at most retry_budget times.
std::vector<FactualAnchor> ExtractFacts(const Document& doc, FactTagger& tagger,
                                        int retry_budget = 3,
                                        std::vector<std::string>* warnings = nullptr);

// Numbers the anchors that occur in prose by first occurrence. Duplicate values
// collapse to one assignment; invalid anchors (empty or containing "<<") and
// absent ones are dropped. Overlapping anchors are resolved the same way
// ApplyRedaction resolves them, so every assignment is actually substituted.
RedactionPlan AssignPlaceholders(std::string_view prose,
                                 const std::vector<FactualAnchor>& anchors);

// Replaces every exact occurrence of each planned value with its placeholder.
// Longer values are matched first; text inside existing placeholders is never
// matched. mask_spans lists every placeholder token in the output.
RedactedDocument ApplyRedaction(std::string_view text, const RedactionPlan& plan);

// Drops structural sections, joins narrative sections with a blank line, and
// redacts the joined stream. Throws Error{kInvalidArgument} when the document
// has no narrative section.
RedactedDocument BuildSageR(const Document& sage_doc,
                            const std::vector<FactualAnchor>& anchors);

// Redacts the original document's plain text in place, keeping structure.
// Placeholder order follows the narrative-only text.
RedactedDocument BuildFtF(const Document& original,
                          const std::vector<FactualAnchor>& anchors);

// Every <<FACT_n>> token in text.
std::vector<MaskSpan> FindPlaceholders(std::string_view text);

nlohmann::json RedactedDocumentToJson(const RedactedDocument& doc);
RedactedDocument RedactedDocumentFromJson(const nlohmann::json& j);

}  // namespace miaudit

#endif  // MIAUDIT_REDACTION_H_
