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
#include "miaudit/paraphrase.h"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "miaudit/error.h"
#include "miaudit/util.h"

namespace miaudit {

const std::string_view kDefaultParaphrasePrompt =
    "You rewrite documents. The input is a sequence of <section "
    "type=\"structure\"> and <section type=\"narrative\"> elements. Return the "
    "same sequence of elements in the same order. Copy every structure section "
    "byte for byte. Paraphrase every narrative section so that it keeps all of "
    "its meaning but uses different wording and sentence structure. Output "
    "only the sections.";

const std::string_view kRaiseFidelityDirective =
    "\n\nFeedback: the previous rewrite lost meaning. Keep every claim, "
    "relation and detail of each narrative section.";

const std::string_view kReduceOverlapDirective =
    "\n\nFeedback: the previous rewrite reused too much of the original "
    "wording. Change vocabulary and sentence structure more aggressively.";

void ParaphraseConfig::Validate() const {
  if (max_attempts < 1) {
    throw Error(ErrorCode::kConfig, "max_attempts must be >= 1");
  }
  if (!(tau_sps >= 0.0 && tau_sps <= 1.0)) {
    throw Error(ErrorCode::kConfig, "tau_sps must lie in [0, 1]");
  }
  if (!(tau_ov >= 0.0 && tau_ov <= 1.0)) {
    throw Error(ErrorCode::kConfig, "tau_ov must lie in [0, 1]");
  }
}

ScriptedParaphraser::ScriptedParaphraser(const std::string& path)
    : ScriptedParaphraser(ReadFile(path), path) {}

ScriptedParaphraser::ScriptedParaphraser(std::string_view content,
                                         std::string_view source_name) {
  for (const JsonLine& line : ParseJsonLines(content, source_name)) {
    try {
      script_.insert_or_assign(
          {line.value.at("id").get<std::string>(),
           line.value.at("attempt").get<int>()},
          line.value.at("markup").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchema, std::string(source_name) + ":" +
                                          std::to_string(line.line_number) +
                                          ": " + e.what());
    }
  }
}

std::string ScriptedParaphraser::Complete(std::string_view prompt,
                                          const Document& source, int attempt) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    prompts_.emplace_back(prompt);
  }
  auto it = script_.find({source.id, attempt});
  if (it == script_.end()) {
    throw Error(ErrorCode::kTransport, "no scripted paraphrase for " +
                                           source.id + " attempt " +
                                           std::to_string(attempt));
  }
  return it->second;
}

std::vector<std::string> ScriptedParaphraser::prompts() const {
  std::lock_guard<std::mutex> lock(mu_);
  return prompts_;
}

std::size_t ScriptedParaphraser::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return prompts_.size();
}

std::string ChatParaphraser::Complete(std::string_view prompt,
                                      const Document& source, int /*attempt*/) {
  return ChatComplete(endpoint_, prompt, ToMarkup(source), retry_);
}

MetricPair EvaluateCandidate(const Document& source, const Document& candidate,
                             FeatureProvider& features) {
  if (source.sections.size() != candidate.sections.size()) {
    throw Error(ErrorCode::kNoEvaluablePairs,
                "section count mismatch: " +
                    std::to_string(source.sections.size()) + " vs " +
                    std::to_string(candidate.sections.size()));
  }
  std::vector<std::string> original;
  std::vector<std::string> rewritten;
  for (std::size_t i = 0; i < source.sections.size(); ++i) {
    const Section& s = source.sections[i];
    const Section& c = candidate.sections[i];
    if (s.kind != c.kind) {
      throw Error(ErrorCode::kNoEvaluablePairs,
                  "section " + std::to_string(i) + " changed kind");
    }
    if (s.kind == SectionKind::kStructural) {
      if (s.text != c.text) {
        throw Error(ErrorCode::kValidation,
                    "structural section " + std::to_string(i) + " was altered");
      }
      continue;
    }
    original.push_back(s.text);
    rewritten.push_back(c.text);
  }
  if (original.empty()) {
    throw Error(ErrorCode::kNoEvaluablePairs, "no narrative sections");
  }
  const double sps = Sps(original, rewritten, features);
  double wordsim = 0.0;
  for (std::size_t k = 0; k < original.size(); ++k) {
    wordsim += WordSim(original[k], rewritten[k]);
  }
  wordsim /= static_cast<double>(original.size());
  return MetricPair::Make(sps, wordsim);
}

std::string UpdatePrompt(std::string_view prompt, double sps, double wordsim,
                         const ParaphraseConfig& cfg) {
  std::string out(prompt);
  if (sps < cfg.tau_sps) out += kRaiseFidelityDirective;
  if (wordsim > cfg.tau_ov) out += kReduceOverlapDirective;
  return out;
}

SageResult GenerateSage(const Document& source, ParaphraserProvider& paraphraser,
                        FeatureProvider& features,
                        const ParaphraseConfig& cfg) {
  cfg.Validate();
  if (NarrativeSpans(source).empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "document " + source.id + " has no narrative section");
  }

  SageResult result;
  std::optional<std::size_t> best;
  std::string prompt = cfg.base_prompt;
  for (int n = 1; n <= cfg.max_attempts; ++n) {
    Candidate cand;
    cand.attempt = n;
    cand.markup = paraphraser.Complete(prompt, source, n);
    ++result.paraphraser_calls;

    try {
      Document doc = ParseSectionedDocument(source.id, cand.markup);
      cand.metrics = EvaluateCandidate(source, doc, features);
      cand.doc = std::move(doc);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParse &&
          e.code() != ErrorCode::kNoEvaluablePairs &&
          e.code() != ErrorCode::kValidation) {
        throw;
      }
      cand.failure = e.what();
      result.all_attempts.push_back(std::move(cand));
      continue;
    }

    const MetricPair m = *cand.metrics;
    if (!best || m.utility > result.all_attempts[*best].metrics->utility) {
      best = result.all_attempts.size();
    }
    if (m.sps >= cfg.tau_sps && m.wordsim <= cfg.tau_ov) {
      cand.accepted_early = true;
      result.all_attempts.push_back(std::move(cand));
      result.chosen = result.all_attempts.back();
      result.stopped_early = true;
      return result;
    }
    result.all_attempts.push_back(std::move(cand));
    prompt = UpdatePrompt(prompt, m.sps, m.wordsim, cfg);
  }

  if (!best) {
    throw Error(ErrorCode::kNoViableCandidate,
                "no viable candidate for " + source.id + " after " +
                    std::to_string(cfg.max_attempts) + " attempts");
  }
  result.chosen = result.all_attempts[*best];
  return result;
}

}  // namespace miaudit
