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
#include "miaudit/scoring.h"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "miaudit/error.h"
#include "miaudit/kernels.h"
#include "miaudit/util.h"

namespace miaudit {

namespace {

std::vector<double> SortedLogprobs(const TokenScoreRecord& rec) {
  std::vector<double> lp;
  lp.reserve(rec.tokens.size());
  for (const TokenScore& t : rec.tokens) lp.push_back(t.logprob);
  std::sort(lp.begin(), lp.end());
  return lp;
}

void RequireTokens(const TokenScoreRecord& rec) {
  if (rec.tokens.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "record " + rec.id + " has no tokens");
  }
}

void RequireSameId(const TokenScoreRecord& a, const TokenScoreRecord& b) {
  if (a.id != b.id) {
    throw Error(ErrorCode::kInvalidArgument,
                "record ids differ: " + a.id + " vs " + b.id);
  }
}

void RequireSameLength(const TokenScoreRecord& a, const TokenScoreRecord& b) {
  if (a.tokens.size() != b.tokens.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "suffix token counts differ for " + a.id + ": " +
                    std::to_string(a.tokens.size()) + " vs " +
                    std::to_string(b.tokens.size()));
  }
}

double MeanOfLowest(std::span<const double> sorted, std::size_t count) {
  return kernels::Sum(sorted.first(count)) / static_cast<double>(count);
}

AttackScore Make(const std::string& id, Attack attack, double raw,
                 const AttackConfig& cfg) {
  return AttackScore{id, attack, cfg.SignOf(attack) * raw};
}

}  // namespace

std::string_view VariantName(Variant v) {
  switch (v) {
    case Variant::kOriginal: return "original";
    case Variant::kLowercase: return "lowercase";
    case Variant::kPrefixedNonmember: return "prefixed_nonmember";
    case Variant::kPrefixedMember: return "prefixed_member";
    case Variant::kReferenceModel: return "reference_model";
  }
  return "original";
}

std::optional<Variant> ParseVariant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (VariantName(v) == name) return v;
  }
  return std::nullopt;
}

std::string_view AttackName(Attack a) {
  switch (a) {
    case Attack::kLoss: return "Loss";
    case Attack::kZlib: return "Zlib";
    case Attack::kLowercase: return "Lowercase";
    case Attack::kMinK: return "Min-K%";
    case Attack::kMinKPlusPlus: return "Min-K%++";
    case Attack::kRecall: return "ReCall";
    case Attack::kConRecall: return "CON-ReCall";
    case Attack::kRatio: return "Ratio";
    case Attack::kBagOfWords: return "Bag-of-Words";
  }
  return "Loss";
}

std::optional<Attack> ParseAttack(std::string_view name) {
  for (Attack a : kAllAttacks) {
    if (AttackName(a) == name) return a;
  }
  return std::nullopt;
}

bool TokenScoreRecord::HasMoments() const {
  return !tokens.empty() &&
         std::all_of(tokens.begin(), tokens.end(),
                     [](const TokenScore& t) { return t.mu.has_value(); });
}

void TokenScoreRecord::Validate() const {
  if (tokens.empty()) {
    throw Error(ErrorCode::kValidation, "record " + id + " has no tokens");
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const TokenScore& t = tokens[i];
    const std::string where = "record " + id + " token " + std::to_string(i);
    if (!std::isfinite(t.logprob) || t.logprob > 0.0) {
      throw Error(ErrorCode::kValidation, where + ": logprob must be finite and <= 0");
    }
    if (t.mu.has_value() != t.sigma.has_value()) {
      throw Error(ErrorCode::kValidation, where + ": mu and sigma go together");
    }
    if (t.sigma && !(*t.sigma > 0.0 && std::isfinite(*t.sigma) &&
                     std::isfinite(*t.mu))) {
      throw Error(ErrorCode::kValidation, where + ": sigma must be > 0");
    }
  }
}

nlohmann::json TokenScoreRecordToJson(const TokenScoreRecord& rec) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const TokenScore& t : rec.tokens) {
    nlohmann::json tok = {{"logprob", t.logprob}};
    if (t.mu) tok["mu"] = *t.mu;
    if (t.sigma) tok["sigma"] = *t.sigma;
    tokens.push_back(std::move(tok));
  }
  return {{"id", rec.id},
          {"variant", std::string(VariantName(rec.variant))},
          {"tokens", tokens},
          {"text_bytes", rec.text_bytes}};
}

TokenScoreRecord TokenScoreRecordFromJson(const nlohmann::json& j) {
  TokenScoreRecord rec;
  try {
    rec.id = j.at("id").get<std::string>();
    auto variant = ParseVariant(j.at("variant").get<std::string>());
    if (!variant) {
      throw Error(ErrorCode::kSchema,
                  "unknown variant " + j.at("variant").get<std::string>());
    }
    rec.variant = *variant;
    for (const auto& t : j.at("tokens")) {
      TokenScore tok;
      tok.logprob = t.at("logprob").get<double>();
      if (t.contains("mu") && !t["mu"].is_null()) tok.mu = t["mu"].get<double>();
      if (t.contains("sigma") && !t["sigma"].is_null()) {
        tok.sigma = t["sigma"].get<double>();
      }
      rec.tokens.push_back(tok);
    }
    rec.text_bytes = j.value("text_bytes", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("token score record: ") + e.what());
  }
  rec.Validate();
  return rec;
}

std::vector<TokenScoreRecord> ParseTokenScoreRecords(std::string_view content,
                                                     std::string_view source) {
  std::vector<TokenScoreRecord> out;
  for (const JsonLine& line : ParseJsonLines(content, source)) {
    try {
      out.push_back(TokenScoreRecordFromJson(line.value));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(source) + ":" +
                                std::to_string(line.line_number) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TokenScoreRecord> LoadTokenScoreRecords(const std::string& path) {
  return ParseTokenScoreRecords(ReadFile(path), path);
}

double MeanLogprob(const TokenScoreRecord& rec) {
  RequireTokens(rec);
  const std::vector<double> lp = SortedLogprobs(rec);
  return MeanOfLowest(lp, lp.size());
}

std::size_t MinKCount(std::size_t tokens, double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "k_percent must lie in (0, 100]");
  }
  const double raw = k_percent * static_cast<double>(tokens) / 100.0;
  const auto count = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::clamp<std::size_t>(count, 1, tokens);
}

std::size_t ZlibCompressedSize(std::string_view text, int level) {
  uLongf size = compressBound(static_cast<uLong>(text.size()));
  std::vector<Bytef> buffer(size);
  const int rc = compress2(buffer.data(), &size,
                           reinterpret_cast<const Bytef*>(text.data()),
                           static_cast<uLong>(text.size()), level);
  if (rc != Z_OK) {
    throw Error(ErrorCode::kInvalidArgument,
                "zlib compress2 failed with code " + std::to_string(rc));
  }
  return static_cast<std::size_t>(size);
}

AttackScore LossScore(const TokenScoreRecord& rec, const AttackConfig& cfg) {
  return Make(rec.id, Attack::kLoss, MeanLogprob(rec), cfg);
}

AttackScore ZlibScore(const TokenScoreRecord& rec, std::string_view raw_text,
                      const AttackConfig& cfg) {
  if (raw_text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "zlib score needs nonempty text");
  }
  if (rec.text_bytes != 0 && rec.text_bytes != raw_text.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "record " + rec.id + " scored " + std::to_string(rec.text_bytes) +
                    " bytes but text has " + std::to_string(raw_text.size()));
  }
  const double compressed =
      static_cast<double>(ZlibCompressedSize(raw_text, cfg.zlib_level));
  return Make(rec.id, Attack::kZlib, MeanLogprob(rec) / compressed, cfg);
}

AttackScore LowercaseScore(const TokenScoreRecord& original,
                           const TokenScoreRecord& lowercase,
                           const AttackConfig& cfg) {
  RequireSameId(original, lowercase);
  return Make(original.id, Attack::kLowercase,
              MeanLogprob(original) - MeanLogprob(lowercase), cfg);
}

AttackScore MinKScore(const TokenScoreRecord& rec, const AttackConfig& cfg) {
  RequireTokens(rec);
  const std::vector<double> lp = SortedLogprobs(rec);
  const std::size_t m = MinKCount(lp.size(), cfg.k_percent);
  return Make(rec.id, Attack::kMinK, MeanOfLowest(lp, m), cfg);
}

AttackScore MinKPlusPlusScore(const TokenScoreRecord& rec,
                              const AttackConfig& cfg) {
  RequireTokens(rec);
  if (!rec.HasMoments()) {
    throw Error(ErrorCode::kUnavailable,
                "Min-K%++ unavailable for " + rec.id + ": tokens lack mu/sigma");
  }
  const std::size_t n = rec.tokens.size();
  std::vector<double> lp(n), mu(n), sigma(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    lp[i] = rec.tokens[i].logprob;
    mu[i] = *rec.tokens[i].mu;
    sigma[i] = *rec.tokens[i].sigma;
  }
  kernels::Standardize(lp, mu, sigma, z);
  std::sort(z.begin(), z.end());
  const std::size_t m = MinKCount(n, cfg.k_percent);
  return Make(rec.id, Attack::kMinKPlusPlus, MeanOfLowest(z, m), cfg);
}

AttackScore RecallScore(const TokenScoreRecord& conditional,
                        const TokenScoreRecord& unconditional,
                        const AttackConfig& cfg) {
  RequireSameId(conditional, unconditional);
  RequireSameLength(conditional, unconditional);
  return Make(conditional.id, Attack::kRecall,
              MeanLogprob(conditional) - MeanLogprob(unconditional), cfg);
}

AttackScore ConRecallScore(const TokenScoreRecord& member_prefixed,
                           const TokenScoreRecord& nonmember_prefixed,
                           const TokenScoreRecord& original,
                           const AttackConfig& cfg) {
  RequireSameId(member_prefixed, nonmember_prefixed);
  RequireSameId(member_prefixed, original);
  RequireSameLength(member_prefixed, original);
  RequireSameLength(nonmember_prefixed, original);
  return Make(original.id, Attack::kConRecall,
              MeanLogprob(nonmember_prefixed) - MeanLogprob(member_prefixed),
              cfg);
}

AttackScore RatioScore(const TokenScoreRecord& target,
                       const TokenScoreRecord& reference,
                       const AttackConfig& cfg) {
  RequireSameId(target, reference);
  return Make(target.id, Attack::kRatio,
              MeanLogprob(target) - MeanLogprob(reference), cfg);
}

const TokenScoreRecord& RecordBundle::Require(Variant v,
                                              Attack for_attack) const {
  auto it = records.find(v);
  if (it == records.end()) {
    throw Error(ErrorCode::kUnavailable,
                std::string(AttackName(for_attack)) + " unavailable for " + id +
                    ": missing " + std::string(VariantName(v)) + " record");
  }
  return it->second;
}

std::vector<RecordBundle> BundleRecords(std::vector<TokenScoreRecord> records) {
  std::vector<RecordBundle> bundles;
  std::map<std::string, std::size_t> index;
  for (TokenScoreRecord& rec : records) {
    auto [it, inserted] = index.try_emplace(rec.id, bundles.size());
    if (inserted) bundles.push_back(RecordBundle{rec.id, {}});
    RecordBundle& b = bundles[it->second];
    const Variant v = rec.variant;
    if (!b.records.try_emplace(v, std::move(rec)).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "duplicate " + std::string(VariantName(v)) + " record for " +
                      b.id);
    }
  }
  return bundles;
}

AttackScore ScoreAttack(Attack attack, const RecordBundle& b,
                        std::string_view raw_text, const AttackConfig& cfg) {
  switch (attack) {
    case Attack::kLoss:
      return LossScore(b.Require(Variant::kOriginal, attack), cfg);
    case Attack::kZlib:
      return ZlibScore(b.Require(Variant::kOriginal, attack), raw_text, cfg);
    case Attack::kLowercase:
      return LowercaseScore(b.Require(Variant::kOriginal, attack),
                            b.Require(Variant::kLowercase, attack), cfg);
    case Attack::kMinK:
      return MinKScore(b.Require(Variant::kOriginal, attack), cfg);
    case Attack::kMinKPlusPlus:
      return MinKPlusPlusScore(b.Require(Variant::kOriginal, attack), cfg);
    case Attack::kRecall:
      return RecallScore(b.Require(Variant::kPrefixedNonmember, attack),
                         b.Require(Variant::kOriginal, attack), cfg);
    case Attack::kConRecall:
      return ConRecallScore(b.Require(Variant::kPrefixedMember, attack),
                            b.Require(Variant::kPrefixedNonmember, attack),
                            b.Require(Variant::kOriginal, attack), cfg);
    case Attack::kRatio:
      return RatioScore(b.Require(Variant::kOriginal, attack),
                        b.Require(Variant::kReferenceModel, attack), cfg);
    case Attack::kBagOfWords:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "Bag-of-Words is corpus-level; use BagOfWordsScores");
}

}  // namespace miaudit
