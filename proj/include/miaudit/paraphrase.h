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
// The metric-gated paraphrase selection loop.
//
// Each attempt asks an external paraphraser for a full sectioned rewrite of
// the source document. Structural sections must come back byte-identical;
// narrative sections are scored pairwise against the source with SPS and
// WordSim. The first attempt meeting both thresholds is returned immediately,
// otherwise the attempt with the highest SPS - WordSim wins.

#ifndef MIAUDIT_PARAPHRASE_H_
#define MIAUDIT_PARAPHRASE_H_

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "miaudit/corpus.h"
#include "miaudit/features.h"
#include "miaudit/http.h"
#include "miaudit/metrics.h"

namespace miaudit {

extern const std::string_view kDefaultParaphrasePrompt;
extern const std::string_view kRaiseFidelityDirective;
extern const std::string_view kReduceOverlapDirective;

struct ParaphraseConfig {
  int max_attempts = 3;
  double tau_sps = 0.60;
  double tau_ov = 0.35;
  std::string base_prompt = std::string(kDefaultParaphrasePrompt);

  // Throws Error{kConfig} when a field is out of range.
  void Validate() const;
};

struct Candidate {
  int attempt = 0;
  // Markup exactly as returned by the paraphraser.
  std::string markup;
  // Present only for evaluable attempts.
  std::optional<Document> doc;
  std::optional<MetricPair> metrics;
  bool accepted_early = false;
  // Why the attempt could not be evaluated; empty for evaluable attempts.
  std::string failure;

  bool evaluable() const { return metrics.has_value(); }
};

struct SageResult {
  Candidate chosen;
  std::vector<Candidate> all_attempts;
  bool stopped_early = false;
  int paraphraser_calls = 0;
};

class ParaphraserProvider {
 public:
  virtual ~ParaphraserProvider() = default;
  // attempt is 1-based. Returns sectioned markup.
  virtual std::string Complete(std::string_view prompt, const Document& source,
                               int attempt) = 0;
};

// Replays a fixture file of {id, attempt, markup} records.
class ScriptedParaphraser final : public ParaphraserProvider {
 public:
  explicit ScriptedParaphraser(const std::string& path);
  ScriptedParaphraser(std::string_view content, std::string_view source_name);

  std::string Complete(std::string_view prompt, const Document& source,
                       int attempt) override;

  // Prompts received, in call order.
  std::vector<std::string> prompts() const;
  std::size_t calls() const;

 private:
  std::map<std::pair<std::string, int>, std::string> script_;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

// Chat-completion paraphraser: system message = prompt, user message =
// ToMarkup(source); the reply content is the candidate markup. Transport
// failures are retried per RetryPolicy and do not consume loop attempts.
class ChatParaphraser final : public ParaphraserProvider {
 public:
  explicit ChatParaphraser(ServiceEndpoint endpoint, RetryPolicy retry = {})
      : endpoint_(std::move(endpoint)), retry_(retry) {}

  std::string Complete(std::string_view prompt, const Document& source,
                       int attempt) override;

 private:
  ServiceEndpoint endpoint_;
  RetryPolicy retry_;
};

// Scores a parsed candidate against its source over aligned narrative
// sections. Throws Error{kNoEvaluablePairs} when the section layout differs or
// no narrative section exists, Error{kValidation} when a structural section
// was altered.
MetricPair EvaluateCandidate(const Document& source, const Document& candidate,
                             FeatureProvider& features);

// Appends the fixed feedback directive(s) for the failed threshold(s).
std::string UpdatePrompt(std::string_view prompt, double sps, double wordsim,
                         const ParaphraseConfig& cfg);

// Throws Error{kNoViableCandidate} if no attempt was evaluable; transport and
// feature-provider errors propagate.
SageResult GenerateSage(const Document& source, ParaphraserProvider& paraphraser,
                        FeatureProvider& features, const ParaphraseConfig& cfg);

}  // namespace miaudit

#endif  // MIAUDIT_PARAPHRASE_H_
