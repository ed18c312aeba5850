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
#include "miaudit/redaction.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "miaudit/error.h"
#include "miaudit/util.h"

namespace miaudit {

namespace {

constexpr std::string_view kSigil = "<<";
constexpr std::string_view kPlaceholderPrefix = "<<FACT_";

struct Claim {
  std::size_t begin;
  std::size_t end;
  std::size_t owner;
};

// Greedy non-overlapping matching. values are tried in the given priority
// order; existing placeholder tokens are pre-claimed so they are never split.
std::vector<Claim> ClaimOccurrences(std::string_view text,
                                    const std::vector<std::string_view>& values) {
  std::map<std::size_t, std::size_t> taken;
  for (const MaskSpan& p : FindPlaceholders(text)) taken[p.begin] = p.end;

  auto overlaps = [&taken](std::size_t b, std::size_t e) {
    auto it = taken.lower_bound(e);
    if (it == taken.begin()) return false;
    --it;
    return it->second > b;
  };

  std::vector<Claim> claims;
  for (std::size_t owner = 0; owner < values.size(); ++owner) {
    std::string_view v = values[owner];
    if (v.empty()) continue;
    std::size_t pos = 0;
    while (true) {
      std::size_t at = text.find(v, pos);
      if (at == std::string_view::npos) break;
      if (overlaps(at, at + v.size())) {
        pos = at + 1;
        continue;
      }
      taken[at] = at + v.size();
      claims.push_back({at, at + v.size(), owner});
      pos = at + v.size();
    }
  }
  return claims;
}

bool ValidAnchorValue(std::string_view value) {
  return !value.empty() && value.find(kSigil) == std::string_view::npos;
}

[[noreturn]] void SchemaFail(const std::string& what) {
  throw Error(ErrorCode::kSchema, "tagger reply: " + what);
}

}  // namespace

std::string_view FactKindName(FactKind kind) {
  switch (kind) {
    case FactKind::kEntity: return "entity";
    case FactKind::kNumber: return "number";
    case FactKind::kDate: return "date";
  }
  return "entity";
}

std::optional<FactKind> ParseFactKind(std::string_view name) {
  if (name == "entity") return FactKind::kEntity;
  if (name == "number") return FactKind::kNumber;
  if (name == "date") return FactKind::kDate;
  return std::nullopt;
}

std::string Placeholder(std::size_t index) {
  return std::string(kPlaceholderPrefix) + std::to_string(index) + ">>";
}

std::vector<MaskSpan> FindPlaceholders(std::string_view text) {
  std::vector<MaskSpan> spans;
  std::size_t pos = 0;
  while (true) {
    std::size_t at = text.find(kPlaceholderPrefix, pos);
    if (at == std::string_view::npos) break;
    std::size_t i = at + kPlaceholderPrefix.size();
    std::size_t digits = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
    if (i > digits && text.substr(i, 2) == ">>") {
      spans.push_back({at, i + 2});
      pos = i + 2;
    } else {
      pos = at + 1;
    }
  }
  return spans;
}

ScriptedTagger::ScriptedTagger(const std::string& path)
    : ScriptedTagger(ReadFile(path), path) {}

ScriptedTagger::ScriptedTagger(std::string_view content,
                               std::string_view source_name) {
  for (const JsonLine& line : ParseJsonLines(content, source_name)) {
    try {
      const auto& v = line.value;
      const int attempt = v.contains("attempt") ? v.at("attempt").get<int>() : 1;
      const auto& response = v.at("response");
      script_.insert_or_assign(
          {v.at("id").get<std::string>(), attempt},
          response.is_string() ? response.get<std::string>() : response.dump());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchema, std::string(source_name) + ":" +
                                          std::to_string(line.line_number) +
                                          ": " + e.what());
    }
  }
}

std::string ScriptedTagger::Tag(const Document& doc, std::string_view,
                                int attempt) {
  auto it = script_.find({doc.id, attempt});
  if (it == script_.end()) {
    throw Error(ErrorCode::kTransport, "no scripted tagger reply for " + doc.id +
                                           " attempt " + std::to_string(attempt));
  }
  return it->second;
}

const std::string_view kTaggerSystemPrompt =
    "You extract factual anchors from text: named entities (people, "
    "organizations, locations, products, tools), numeric quantities and date "
    "expressions. Reply with a JSON array only. Each element is an object "
    "{\"value\": <exact substring of the narrative>, \"type\": \"entity\" | "
    "\"number\" | \"date\", \"notes\": <optional short string>}.\n"
    "Example narrative: Using pdfbox, I produced a PDF/A-2b document in 2019.\n"
    "Example reply: [{\"value\": \"pdfbox\", \"type\": \"entity\"}, "
    "{\"value\": \"PDF/A-2b\", \"type\": \"entity\"}, {\"value\": \"2019\", "
    "\"type\": \"date\"}]";

std::string ChatTagger::Tag(const Document& doc, std::string_view narrative,
                            int attempt) {
  std::string user = "Document:\n" + ToMarkup(doc) + "\n\nNarrative:\n" +
                     std::string(narrative);
  if (attempt > 1) {
    user += "\n\nYour previous reply did not match the schema. Reply with the "
            "JSON array only.";
  }
  return ChatComplete(endpoint_, kTaggerSystemPrompt, user, retry_);
}

std::vector<FactualAnchor> ParseTaggerResponse(
    std::string_view response, std::vector<std::string>* warnings) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(response);
  } catch (const nlohmann::json::parse_error& e) {
    SchemaFail(std::string("not JSON: ") + e.what());
  }
  if (!parsed.is_array()) SchemaFail("expected a JSON array");

  std::vector<FactualAnchor> anchors;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const auto& item = parsed[i];
    const std::string where = "item " + std::to_string(i);
    if (!item.is_object()) SchemaFail(where + " is not an object");
    for (const auto& [key, _] : item.items()) {
      if (key != "value" && key != "type" && key != "notes") {
        SchemaFail(where + " has unexpected key '" + key + "'");
      }
    }
    if (!item.contains("value") || !item["value"].is_string() ||
        item["value"].get<std::string>().empty()) {
      SchemaFail(where + " needs a nonempty string value");
    }
    if (!item.contains("type") || !item["type"].is_string()) {
      SchemaFail(where + " needs a string type");
    }
    auto kind = ParseFactKind(item["type"].get<std::string>());
    if (!kind) SchemaFail(where + " has unknown type");
    FactualAnchor anchor{item["value"].get<std::string>(), *kind, std::nullopt};
    if (item.contains("notes") && !item["notes"].is_null()) {
      if (!item["notes"].is_string()) SchemaFail(where + " notes must be a string");
      anchor.notes = item["notes"].get<std::string>();
    }
    if (!ValidAnchorValue(anchor.value)) {
      if (warnings) {
        warnings->push_back("dropped anchor containing placeholder sigil: " +
                            anchor.value);
      }
      continue;
    }
    anchors.push_back(std::move(anchor));
  }
  return anchors;
}

std::vector<FactualAnchor> ExtractFacts(const Document& doc, FactTagger& tagger,
                                        int retry_budget,
                                        std::vector<std::string>* warnings) {
  const std::string narrative = FlattenNarrative(doc);
  std::string last_error;
  for (int attempt = 1; attempt <= retry_budget; ++attempt) {
    const std::string reply = tagger.Tag(doc, narrative, attempt);
    try {
      return ParseTaggerResponse(reply, warnings);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::kSchema, "tagger reply for " + doc.id +
                                      " failed validation " +
                                      std::to_string(retry_budget) +
                                      " times; last: " + last_error);
}

RedactionPlan AssignPlaceholders(std::string_view prose,
                                 const std::vector<FactualAnchor>& anchors) {
  std::vector<const FactualAnchor*> unique;
  std::unordered_set<std::string_view> seen;
  for (const FactualAnchor& a : anchors) {
    if (!ValidAnchorValue(a.value)) continue;
    if (seen.insert(a.value).second) unique.push_back(&a);
  }

  // Priority: longer values first, then earlier raw occurrence.
  std::vector<std::size_t> order(unique.size());
  std::iota(order.begin(), order.end(), 0);
  auto raw_first = [&](std::size_t i) { return prose.find(unique[i]->value); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (unique[a]->value.size() != unique[b]->value.size()) {
      return unique[a]->value.size() > unique[b]->value.size();
    }
    return raw_first(a) < raw_first(b);
  });
  std::vector<std::string_view> values;
  for (std::size_t i : order) values.push_back(unique[i]->value);

  std::vector<std::size_t> first(unique.size(), std::string_view::npos);
  for (const Claim& c : ClaimOccurrences(prose, values)) {
    std::size_t idx = order[c.owner];
    first[idx] = std::min(first[idx], c.begin);
  }

  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    if (first[i] != std::string_view::npos) present.push_back(i);
  }
  std::sort(present.begin(), present.end(),
            [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });

  RedactionPlan plan;
  for (std::size_t rank = 0; rank < present.size(); ++rank) {
    const std::size_t i = present[rank];
    plan.assignments.push_back({*unique[i], Placeholder(rank + 1), first[i]});
  }
  return plan;
}

RedactedDocument ApplyRedaction(std::string_view text,
                                const RedactionPlan& plan) {
  std::vector<std::size_t> order(plan.assignments.size());
  std::iota(order.begin(), order.end(), 0);
  // Same priority as AssignPlaceholders so a plan built from this text is
  // reproduced claim for claim.
  auto raw_first = [&](std::size_t i) {
    return text.find(plan.assignments[i].anchor.value);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& va = plan.assignments[a].anchor.value;
    const auto& vb = plan.assignments[b].anchor.value;
    if (va.size() != vb.size()) return va.size() > vb.size();
    return raw_first(a) < raw_first(b);
  });
  std::vector<std::string_view> values;
  for (std::size_t i : order) {
    const std::string& v = plan.assignments[i].anchor.value;
    values.push_back(ValidAnchorValue(v) ? std::string_view(v)
                                         : std::string_view());
  }

  std::vector<Claim> claims = ClaimOccurrences(text, values);
  std::sort(claims.begin(), claims.end(),
            [](const Claim& a, const Claim& b) { return a.begin < b.begin; });

  RedactedDocument out;
  out.plan = plan;
  std::size_t cursor = 0;
  for (const Claim& c : claims) {
    out.text.append(text.substr(cursor, c.begin - cursor));
    out.text.append(plan.assignments[order[c.owner]].placeholder);
    cursor = c.end;
  }
  out.text.append(text.substr(cursor));
  out.mask_spans = FindPlaceholders(out.text);
  return out;
}

RedactedDocument BuildSageR(const Document& sage_doc,
                            const std::vector<FactualAnchor>& anchors) {
  if (NarrativeSpans(sage_doc).empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "document " + sage_doc.id + " has no narrative section");
  }
  const std::string stream = FlattenNarrative(sage_doc);
  RedactedDocument out = ApplyRedaction(stream, AssignPlaceholders(stream, anchors));
  out.id = sage_doc.id;
  return out;
}

RedactedDocument BuildFtF(const Document& original,
                          const std::vector<FactualAnchor>& anchors) {
  const std::string prose = FlattenNarrative(original);
  RedactedDocument out =
      ApplyRedaction(PlainText(original), AssignPlaceholders(prose, anchors));
  out.id = original.id;
  return out;
}

nlohmann::json RedactedDocumentToJson(const RedactedDocument& doc) {
  nlohmann::json spans = nlohmann::json::array();
  for (const MaskSpan& s : doc.mask_spans) spans.push_back({s.begin, s.end});
  nlohmann::json plan = nlohmann::json::array();
  for (const auto& a : doc.plan.assignments) {
    nlohmann::json item = {{"placeholder", a.placeholder},
                           {"value", a.anchor.value},
                           {"type", std::string(FactKindName(a.anchor.kind))},
                           {"first_offset", a.first_offset}};
    if (a.anchor.notes) item["notes"] = *a.anchor.notes;
    plan.push_back(std::move(item));
  }
  return {{"id", doc.id}, {"text", doc.text}, {"mask_spans", spans},
          {"plan", plan}};
}

RedactedDocument RedactedDocumentFromJson(const nlohmann::json& j) {
  RedactedDocument doc;
  try {
    doc.id = j.at("id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    for (const auto& s : j.at("mask_spans")) {
      doc.mask_spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
    }
    for (const auto& a : j.at("plan")) {
      auto kind = ParseFactKind(a.at("type").get<std::string>());
      if (!kind) throw Error(ErrorCode::kSchema, "unknown fact type");
      FactualAnchor anchor{a.at("value").get<std::string>(), *kind, std::nullopt};
      if (a.contains("notes")) anchor.notes = a.at("notes").get<std::string>();
      doc.plan.assignments.push_back({std::move(anchor),
                                      a.at("placeholder").get<std::string>(),
                                      a.at("first_offset").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("redacted record: ") + e.what());
  }
  return doc;
}

}  // namespace miaudit
