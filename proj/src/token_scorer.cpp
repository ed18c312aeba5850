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
#include "miaudit/token_scorer.h"

#include "miaudit/error.h"
#include "miaudit/util.h"

namespace miaudit {

std::vector<ScoreRequest> BuildScoreRequests(const std::string& id,
                                             const std::string& text,
                                             const RecallPrefixes& prefixes,
                                             bool want_moments) {
  std::vector<ScoreRequest> out;
  out.push_back({id, Variant::kOriginal, text, "", want_moments});
  out.push_back({id, Variant::kLowercase, AsciiLower(text), "", false});
  if (!prefixes.nonmember.empty()) {
    out.push_back({id, Variant::kPrefixedNonmember, text,
                   prefixes.nonmember + std::string(kPrefixSeparator), false});
  }
  if (!prefixes.member.empty()) {
    out.push_back({id, Variant::kPrefixedMember, text,
                   prefixes.member + std::string(kPrefixSeparator), false});
  }
  out.push_back({id, Variant::kReferenceModel, text, "", false});
  return out;
}

FileTokenScorer::FileTokenScorer(const std::string& path)
    : FileTokenScorer(ReadFile(path), path) {}

FileTokenScorer::FileTokenScorer(std::string_view content,
                                 std::string_view source_name) {
  for (auto& rec : ParseTokenScoreRecords(content, source_name)) {
    auto key = std::make_pair(rec.id, rec.variant);
    if (records_.contains(key)) {
      throw Error(ErrorCode::kDuplicateId,
                  std::string(source_name) + ": duplicate record for " +
                      rec.id + "/" + std::string(VariantName(rec.variant)));
    }
    records_.emplace(std::move(key), std::move(rec));
  }
}

TokenScoreRecord FileTokenScorer::Score(const ScoreRequest& request) {
  auto it = records_.find({request.id, request.variant});
  if (it == records_.end()) {
    throw Error(ErrorCode::kProvider,
                "no token scores for " + request.id + "/" +
                    std::string(VariantName(request.variant)));
  }
  if (it->second.text_bytes != 0 &&
      it->second.text_bytes != request.text.size()) {
    throw Error(ErrorCode::kValidation,
                "token scores for " + request.id + "/" +
                    std::string(VariantName(request.variant)) +
                    " were computed on a different text");
  }
  TokenScoreRecord rec = it->second;
  // Match the service contract: moments only when asked for.
  if (!request.want_moments) {
    for (auto& t : rec.tokens) t.mu = t.sigma = std::nullopt;
  }
  return rec;
}

TokenScoreRecord ServiceTokenScorer::Score(const ScoreRequest& request) {
  const ServiceEndpoint& endpoint =
      request.variant == Variant::kReferenceModel ? reference_ : target_;
  if (!endpoint.configured()) {
    throw Error(ErrorCode::kConfig,
                std::string("no endpoint configured for ") +
                    std::string(VariantName(request.variant)) + " scoring");
  }
  nlohmann::json body = {{"text", request.text},
                         {"want_moments", request.want_moments}};
  if (!request.prefix.empty()) body["prefix"] = request.prefix;
  if (!endpoint.model.empty()) body["model"] = endpoint.model;
  ++calls_;
  const nlohmann::json response = PostJson(endpoint, body, retry_);

  TokenScoreRecord rec;
  rec.id = request.id;
  rec.variant = request.variant;
  rec.text_bytes = request.text.size();
  try {
    for (const auto& t : response.at("tokens")) {
      TokenScore ts;
      ts.logprob = t.at("logprob").get<double>();
      if (t.contains("mu")) ts.mu = t.at("mu").get<double>();
      if (t.contains("sigma")) ts.sigma = t.at("sigma").get<double>();
      rec.tokens.push_back(ts);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kTransport,
                "malformed score response from " + endpoint.url + ": " +
                    e.what());
  }
  rec.Validate();
  return rec;
}

}  // namespace miaudit
