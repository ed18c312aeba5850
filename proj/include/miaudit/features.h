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
// Feature providers: the boundary to the external semantic oracle.

#ifndef MIAUDIT_FEATURES_H_
#define MIAUDIT_FEATURES_H_

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "miaudit/metrics.h"

namespace miaudit {

enum class FeatureSource { kFileBacked, kServiceBacked, kInMemory };

class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;

  // One vector per input text, in input order. Must be safe to call
  // concurrently.
  virtual std::vector<SparseFeatureVector> Fetch(
      std::span<const std::string> texts) = 0;
  virtual FeatureSource source() const = 0;
};

// Feature-file record: {text_sha256, dim, indices, values}.
nlohmann::json FeatureRecordToJson(std::string_view text,
                                   const SparseFeatureVector& v);
SparseFeatureVector FeatureVectorFromJson(const nlohmann::json& j);

// Read-only lookup by SHA-256 of the exact text bytes.
class FileFeatureProvider final : public FeatureProvider {
 public:
  explicit FileFeatureProvider(const std::string& path);
  FileFeatureProvider(std::string_view content, std::string_view source_name);

  std::vector<SparseFeatureVector> Fetch(
      std::span<const std::string> texts) override;
  FeatureSource source() const override { return FeatureSource::kFileBacked; }
  std::size_t size() const { return by_hash_.size(); }

 private:
  void Load(std::string_view content, std::string_view source_name);

  std::unordered_map<std::string, SparseFeatureVector> by_hash_;
  std::uint32_t dim_ = 0;
};

struct ServiceEndpoint;

// POST {texts:[...]} to the feature service. Each request carries one text;
// at most max_in_flight requests run at once and results come back in input
// order.
class ServiceFeatureProvider final : public FeatureProvider {
 public:
  ServiceFeatureProvider(const ServiceEndpoint& endpoint,
                         std::size_t max_in_flight = 4);
  ~ServiceFeatureProvider() override;

  std::vector<SparseFeatureVector> Fetch(
      std::span<const std::string> texts) override;
  FeatureSource source() const override {
    return FeatureSource::kServiceBacked;
  }

 private:
  std::unique_ptr<ServiceEndpoint> endpoint_;
  std::size_t max_in_flight_;
};

// Memoizes another provider by exact text bytes. upstream_calls() counts the
// texts that actually reached the wrapped provider.
class CachingFeatureProvider final : public FeatureProvider {
 public:
  explicit CachingFeatureProvider(FeatureProvider& upstream)
      : upstream_(upstream) {}

  std::vector<SparseFeatureVector> Fetch(
      std::span<const std::string> texts) override;
  FeatureSource source() const override { return upstream_.source(); }
  std::size_t upstream_calls() const { return upstream_calls_.load(); }

 private:
  FeatureProvider& upstream_;
  std::mutex mu_;
  std::unordered_map<std::string, SparseFeatureVector> cache_;
  std::atomic<std::size_t> upstream_calls_{0};
};

}  // namespace miaudit

#endif  // MIAUDIT_FEATURES_H_
