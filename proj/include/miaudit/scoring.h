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
// Membership-inference attack statistics over externally produced per-token
// log-probabilities. Every score is oriented so that larger means stronger
// membership evidence; AttackConfig::sign can flip individual attacks.
//
// All means are taken over the token log-probabilities sorted ascending, so a
// score depends only on the multiset of tokens and Min-K% at k = 100 is
// bit-identical to Loss.

#ifndef MIAUDIT_SCORING_H_
#define MIAUDIT_SCORING_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "miaudit/corpus.h"

namespace miaudit {

enum class Variant {
  kOriginal,
  kLowercase,
  kPrefixedNonmember,
  kPrefixedMember,
  kReferenceModel,
};

inline constexpr std::array<Variant, 5> kAllVariants = {
    Variant::kOriginal, Variant::kLowercase, Variant::kPrefixedNonmember,
    Variant::kPrefixedMember, Variant::kReferenceModel};

std::string_view VariantName(Variant v);
std::optional<Variant> ParseVariant(std::string_view name);

struct TokenScore {
  double logprob = 0.0;
  std::optional<double> mu;
  std::optional<double> sigma;

  friend bool operator==(const TokenScore&, const TokenScore&) = default;
};

struct TokenScoreRecord {
  std::string id;
  Variant variant = Variant::kOriginal;
  std::vector<TokenScore> tokens;
  std::size_t text_bytes = 0;

  bool HasMoments() const;
  // Throws Error{kValidation}: empty tokens, logprob > 0 or non-finite,
  // mu without sigma (or the reverse), sigma <= 0.
  void Validate() const;

  friend bool operator==(const TokenScoreRecord&,
                         const TokenScoreRecord&) = default;
};

nlohmann::json TokenScoreRecordToJson(const TokenScoreRecord& rec);
TokenScoreRecord TokenScoreRecordFromJson(const nlohmann::json& j);
std::vector<TokenScoreRecord> LoadTokenScoreRecords(const std::string& path);
std::vector<TokenScoreRecord> ParseTokenScoreRecords(std::string_view content,
                                                     std::string_view source);

enum class Attack {
  kLoss,
  kZlib,
  kLowercase,
  kMinK,
  kMinKPlusPlus,
  kRecall,
  kConRecall,
  kRatio,
  kBagOfWords,
};

inline constexpr std::array<Attack, 9> kAllAttacks = {
    Attack::kLoss,   Attack::kZlib,      Attack::kLowercase,
    Attack::kMinK,   Attack::kMinKPlusPlus, Attack::kRecall,
    Attack::kConRecall, Attack::kRatio,  Attack::kBagOfWords};

// Display names, also used in score files: "Loss", "Min-K%++", ...
std::string_view AttackName(Attack a);
std::optional<Attack> ParseAttack(std::string_view name);

struct AttackScore {
  std::string id;
  Attack attack = Attack::kLoss;
  double score = 0.0;
};

struct AttackConfig {
  double k_percent = 20.0;
  int zlib_level = 6;
  int bow_folds = 5;
  std::uint64_t seed = 0;
  std::map<Attack, double> sign;

  double SignOf(Attack a) const {
    auto it = sign.find(a);
    return it == sign.end() ? 1.0 : it->second;
  }
};

// Mean log-probability (order-independent).
double MeanLogprob(const TokenScoreRecord& rec);

// Number of tokens kept by the Min-K% family: floor(k% * T), at least 1.
std::size_t MinKCount(std::size_t tokens, double k_percent);

// Size in bytes of the zlib (RFC 1950) stream of text at the given level.
std::size_t ZlibCompressedSize(std::string_view text, int level = 6);

AttackScore LossScore(const TokenScoreRecord& rec, const AttackConfig& cfg = {});
AttackScore ZlibScore(const TokenScoreRecord& rec, std::string_view raw_text,
                      const AttackConfig& cfg = {});
AttackScore LowercaseScore(const TokenScoreRecord& original,
                           const TokenScoreRecord& lowercase,
                           const AttackConfig& cfg = {});
AttackScore MinKScore(const TokenScoreRecord& rec, const AttackConfig& cfg = {});
// Throws Error{kUnavailable} when any token lacks mu/sigma.
AttackScore MinKPlusPlusScore(const TokenScoreRecord& rec,
                              const AttackConfig& cfg = {});
AttackScore RecallScore(const TokenScoreRecord& conditional,
                        const TokenScoreRecord& unconditional,
                        const AttackConfig& cfg = {});
AttackScore ConRecallScore(const TokenScoreRecord& member_prefixed,
                           const TokenScoreRecord& nonmember_prefixed,
                           const TokenScoreRecord& original,
                           const AttackConfig& cfg = {});
AttackScore RatioScore(const TokenScoreRecord& target,
                       const TokenScoreRecord& reference,
                       const AttackConfig& cfg = {});

// All records of one text, indexed by variant.
struct RecordBundle {
  std::string id;
  std::map<Variant, TokenScoreRecord> records;

  const TokenScoreRecord& Require(Variant v, Attack for_attack) const;
};

// Groups records by id, preserving first-seen id order. Duplicate (id,
// variant) pairs are an error.
std::vector<RecordBundle> BundleRecords(std::vector<TokenScoreRecord> records);

// Dispatches one model-based attack. Missing records or moments throw
// Error{kUnavailable}. kBagOfWords is rejected here.
AttackScore ScoreAttack(Attack attack, const RecordBundle& bundle,
                        std::string_view raw_text, const AttackConfig& cfg = {});

// Out-of-fold membership probabilities from a lexical classifier. Reads only
// the corpus text, never token scores. Throws Error{kInvalidArgument} for a
// single-label corpus or folds < 2.
std::vector<AttackScore> BagOfWordsScores(const LabeledCorpus& corpus,
                                          const AttackConfig& cfg = {});

}  // namespace miaudit

#endif  // MIAUDIT_SCORING_H_
