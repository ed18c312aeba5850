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
#include "miaudit/features.h"

#include <future>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

#include "miaudit/error.h"
#include "miaudit/http.h"
#include "miaudit/util.h"

namespace miaudit {

nlohmann::json FeatureRecordToJson(std::string_view text,
                                   const SparseFeatureVector& v) {
  return {
      {"text_sha256", Sha256Hex(text)},
      {"dim", v.dim()},
      {"indices", std::vector<std::uint32_t>(v.indices().begin(),
                                             v.indices().end())},
      {"values", std::vector<double>(v.values().begin(), v.values().end())},
  };
}

SparseFeatureVector FeatureVectorFromJson(const nlohmann::json& j) {
  try {
    return SparseFeatureVector(j.at("dim").get<std::uint32_t>(),
                               j.at("indices").get<std::vector<std::uint32_t>>(),
                               j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema,
                std::string("malformed feature record: ") + e.what());
  }
}

FileFeatureProvider::FileFeatureProvider(const std::string& path) {
  Load(ReadFile(path), path);
}

FileFeatureProvider::FileFeatureProvider(std::string_view content,
                                         std::string_view source_name) {
  Load(content, source_name);
}

void FileFeatureProvider::Load(std::string_view content,
                               std::string_view source_name) {
  for (const JsonLine& line : ParseJsonLines(content, source_name)) {
    const std::string where =
        std::string(source_name) + ":" + std::to_string(line.line_number);
    SparseFeatureVector v;
    std::string hash;
    try {
      hash = line.value.at("text_sha256").get<std::string>();
      v = FeatureVectorFromJson(line.value);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchema, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    if (dim_ == 0) dim_ = v.dim();
    if (v.dim() != dim_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  where + ": dim differs from earlier records");
    }
    by_hash_.insert_or_assign(std::move(hash), std::move(v));
  }
}

std::vector<SparseFeatureVector> FileFeatureProvider::Fetch(
    std::span<const std::string> texts) {
  std::vector<SparseFeatureVector> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) {
    const std::string hash = Sha256Hex(text);
    auto it = by_hash_.find(hash);
    if (it == by_hash_.end()) {
      throw Error(ErrorCode::kProvider, "no features for text sha256 " + hash);
    }
    out.push_back(it->second);
  }
  return out;
}

ServiceFeatureProvider::ServiceFeatureProvider(const ServiceEndpoint& endpoint,
                                               std::size_t max_in_flight)
    : endpoint_(std::make_unique<ServiceEndpoint>(endpoint)),
      max_in_flight_(max_in_flight == 0 ? 1 : max_in_flight) {}

ServiceFeatureProvider::~ServiceFeatureProvider() = default;

namespace {

// Accepts either {"features":[...]} or a bare array of per-text records.
SparseFeatureVector FirstFeatureRecord(const nlohmann::json& response) {
  const nlohmann::json* list = &response;
  if (response.is_object() && response.contains("features")) {
    list = &response["features"];
  }
  if (!list->is_array() || list->size() != 1) {
    throw Error(ErrorCode::kProvider,
                "feature service returned a malformed response");
  }
  return FeatureVectorFromJson((*list)[0]);
}

}  // namespace

std::vector<SparseFeatureVector> ServiceFeatureProvider::Fetch(
    std::span<const std::string> texts) {
  std::counting_semaphore<> budget(static_cast<std::ptrdiff_t>(max_in_flight_));
  std::vector<std::future<SparseFeatureVector>> pending;
  pending.reserve(texts.size());
  for (const std::string& text : texts) {
    budget.acquire();
    pending.push_back(std::async(std::launch::async, [this, &budget, &text] {
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{budget};
      nlohmann::json body = {{"texts", {text}}};
      return FirstFeatureRecord(PostJson(*endpoint_, body));
    }));
  }
  std::vector<SparseFeatureVector> out;
  out.reserve(texts.size());
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

std::vector<SparseFeatureVector> CachingFeatureProvider::Fetch(
    std::span<const std::string> texts) {
  std::vector<std::string> missing;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (const std::string& t : texts) {
      if (!cache_.contains(t) &&
          std::find(missing.begin(), missing.end(), t) == missing.end()) {
        missing.push_back(t);
      }
    }
  }
  if (!missing.empty()) {
    std::vector<SparseFeatureVector> fetched = upstream_.Fetch(missing);
    upstream_calls_ += missing.size();
    std::lock_guard<std::mutex> lock(mu_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      cache_.try_emplace(missing[i], std::move(fetched[i]));
    }
  }
  std::vector<SparseFeatureVector> out;
  out.reserve(texts.size());
  std::lock_guard<std::mutex> lock(mu_);
  for (const std::string& t : texts) out.push_back(cache_.at(t));
  return out;
}

}  // namespace miaudit
