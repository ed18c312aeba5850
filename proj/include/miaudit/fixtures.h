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

// Deterministic synthetic data for tests and the bundled offline demo. None of
// it comes from a real model: token scores are generated so that member texts
// look memorized, features come from a hashed bag of synonym classes, and
// paraphrases are synonym substitutions.

#ifndef MIAUDIT_FIXTURES_H_
#define MIAUDIT_FIXTURES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "miaudit/corpus.h"
#include "miaudit/features.h"
#include "miaudit/scoring.h"
#include "miaudit/token_scorer.h"

namespace miaudit::fixtures {

struct ScoredCorpus {
  LabeledCorpus corpus;
  // Every variant for every example, with per-token moments.
  std::vector<TokenScoreRecord> records;
};

// Members carry a shared marker word and every model-based statistic puts
// each member above each nonmember under the default orientation.
ScoredCorpus MakeSeparableFixture(std::size_t members, std::size_t nonmembers,
                                  std::uint64_t seed);

// The separable fixture of size n with its labels shuffled, leaving no
// relation between labels and scores.
ScoredCorpus MakePermutedLabelFixture(std::size_t n, std::uint64_t seed);

// Pseudo-oracle: one feature per synonym class, valued by occurrence count,
// plus a weaker feature per surface word. Synonym swaps therefore keep most
// but not all of the vector.
SparseFeatureVector ConceptFeatures(std::string_view text,
                                    std::uint32_t dim = 4096);

class ConceptFeatureProvider final : public FeatureProvider {
 public:
  std::vector<SparseFeatureVector> Fetch(
      std::span<const std::string> texts) override;
  FeatureSource source() const override { return FeatureSource::kInMemory; }
};

// Synthetic target-model scores for one request. Tokens of memorized_text are
// boosted when member is true.
TokenScoreRecord SyntheticTokenScores(const ScoreRequest& request,
                                      const std::string& memorized_text,
                                      bool member);

// Writes the offline demo: corpus.jsonl, pipeline.ini, features.jsonl,
// tags.jsonl, paraphrases/<run>.jsonl, prefixes/*.txt and
// scores/<run>/<regime>.jsonl under dir. Returns the written paths.
std::vector<std::string> WritePipelineFixture(const std::string& dir,
                                              std::size_t documents = 20,
                                              std::uint64_t seed = 0);

}  // namespace miaudit::fixtures

#endif  // MIAUDIT_FIXTURES_H_
