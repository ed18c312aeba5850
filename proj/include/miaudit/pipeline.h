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

// End-to-end batch pipeline over one labeled corpus:
//
//   parse -> sage -> sage-r / ft-f -> score -> attack -> eval -> audit
//
// Every stage reads and writes files under the configured output directory
// (layout below), so stages can be run one at a time. A stage whose inputs,
// provider fixtures and config section are unchanged, and whose outputs are
// still intact, is skipped; the content hashes live in .cache/.
//
//   parse/documents.jsonl            {id, label, markup}
//   runs/<run>/sage.jsonl            chosen paraphrase + per-attempt metrics
//   tags/tags.jsonl                  factual anchors per document
//   runs/<run>/sage_r.jsonl          redacted paraphrase
//   shared/ft_f.jsonl                redacted original
//   scores/<run>/<regime>.jsonl      token-score records
//   scores/<run>/<regime>.texts.jsonl  the scored texts {id, text, label}
//   attacks/<run>/<regime>.jsonl     {id, attack, score, label}
//   attacks/availability.json
//   report/<run>.json, report/results.{md,tsv,json}
//   audit/audit.jsonl
//
// <run> is "shared" for the FT and FT-F regimes, which do not depend on a
// paraphraser run.

#ifndef MIAUDIT_PIPELINE_H_
#define MIAUDIT_PIPELINE_H_

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "miaudit/config.h"

namespace miaudit {

enum class Stage { kParse, kSage, kSageR, kFtF, kScore, kAttack, kEval, kAudit };

inline constexpr std::array<Stage, 8> kAllStages = {
    Stage::kParse, Stage::kSage,   Stage::kSageR, Stage::kFtF,
    Stage::kScore, Stage::kAttack, Stage::kEval,  Stage::kAudit};

// "parse", "sage", "sage-r", "ft-f", "score", "attack", "eval", "audit".
std::string_view StageName(Stage stage);
std::optional<Stage> ParseStage(std::string_view name);

struct StageOutcome {
  Stage stage = Stage::kParse;
  // True when every unit of work was served from the cache.
  bool cached = false;
  // Paths relative to the output directory.
  std::vector<std::string> artifacts;
};

struct ProviderCalls {
  std::size_t paraphraser = 0;
  std::size_t tagger = 0;
  std::size_t features = 0;
  std::size_t scorer = 0;

  std::size_t total() const { return paraphraser + tagger + features + scorer; }
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);
  ~Pipeline();

  // Runs one stage. Its input artifacts must already exist.
  StageOutcome Run(Stage stage);
  std::vector<StageOutcome> RunAll();

  ProviderCalls calls() const;
  nlohmann::json Summary(const std::vector<StageOutcome>& outcomes) const;
  const PipelineConfig& config() const { return cfg_; }

 private:
  struct Impl;

  PipelineConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace miaudit

#endif  // MIAUDIT_PIPELINE_H_
