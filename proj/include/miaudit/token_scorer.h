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

// Sources of token-score records: a replayed JSONL file or a live scoring
// service. The scoring stage asks for one record per (text, variant).

#ifndef MIAUDIT_TOKEN_SCORER_H_
#define MIAUDIT_TOKEN_SCORER_H_

#include <atomic>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "miaudit/http.h"
#include "miaudit/scoring.h"

namespace miaudit {

// Separator between a ReCall prefix and the scored text.
inline constexpr std::string_view kPrefixSeparator = "\n\n";

struct ScoreRequest {
  std::string id;
  Variant variant = Variant::kOriginal;
  // The suffix whose tokens are scored.
  std::string text;
  // Empty means unconditional.
  std::string prefix;
  bool want_moments = true;
};

struct RecallPrefixes {
  std::string member;
  std::string nonmember;
};

// Requests for every variant that can be built: original, lowercase and
// reference_model always; the prefixed variants only when the matching
// prefix is nonempty.
std::vector<ScoreRequest> BuildScoreRequests(const std::string& id,
                                             const std::string& text,
                                             const RecallPrefixes& prefixes,
                                             bool want_moments);

class TokenScorer {
 public:
  virtual ~TokenScorer() = default;
  // Must be safe to call concurrently.
  virtual TokenScoreRecord Score(const ScoreRequest& request) = 0;
};

// Looks records up by (id, variant). A missing record is Error{kProvider}; a
// record whose text_bytes disagrees with the request is Error{kValidation}.
// Moments are dropped unless the request wants them.
class FileTokenScorer final : public TokenScorer {
 public:
  explicit FileTokenScorer(const std::string& path);
  FileTokenScorer(std::string_view content, std::string_view source_name);

  TokenScoreRecord Score(const ScoreRequest& request) override;

 private:
  std::map<std::pair<std::string, Variant>, TokenScoreRecord> records_;
};

// POST {text, prefix?, want_moments, model?} -> {tokens: [...]}. The
// reference_model variant goes to reference_endpoint.
class ServiceTokenScorer final : public TokenScorer {
 public:
  ServiceTokenScorer(ServiceEndpoint target, ServiceEndpoint reference,
                     RetryPolicy retry = {})
      : target_(std::move(target)),
        reference_(std::move(reference)),
        retry_(retry) {}

  TokenScoreRecord Score(const ScoreRequest& request) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  ServiceEndpoint target_;
  ServiceEndpoint reference_;
  RetryPolicy retry_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace miaudit

#endif  // MIAUDIT_TOKEN_SCORER_H_
