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

// Pipeline configuration, read from an INI-style file:
//
//   [dataset]      name, corpus
//   [run]          runs (comma list), output, parallelism, seed
//   [sage]         max_attempts, tau_sps, tau_ov
//   [attack]       k_percent, bow_folds, zlib_level, want_moments,
//                  member_prefix, nonmember_prefix (files)
//   [eval]         fpr_target
//   [audit]        attack, tau_mia, eps_rob, eps_util
//   [paraphraser] [tagger] [features] [scorer]
//                  source = file | service
//                  path            file source; may contain {run}, {regime}
//                  url, api_key_env, model, timeout_ms
//                  models          paraphraser only: one model per run
//                  reference_url, reference_model   scorer only
//
// Relative paths resolve against the config file's directory. Credentials
// are read from the environment variable named by api_key_env at request
// time and never stored here.

#ifndef MIAUDIT_CONFIG_H_
#define MIAUDIT_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "miaudit/eval.h"
#include "miaudit/http.h"
#include "miaudit/paraphrase.h"
#include "miaudit/protocol.h"
#include "miaudit/scoring.h"

namespace miaudit {

enum class ProviderSource { kFile, kService };

struct ProviderConfig {
  ProviderSource source = ProviderSource::kFile;
  // File source: path template.
  std::string path;
  // Service source.
  ServiceEndpoint endpoint;
  std::vector<std::string> models;
  ServiceEndpoint reference;

  // The file path with {run} and {regime} substituted.
  std::string PathFor(const std::string& run, const std::string& regime) const;
};

struct PipelineConfig {
  std::string dataset = "dataset";
  std::string corpus;
  std::string output_dir = "out";
  std::vector<std::string> runs = {"run1", "run2", "run3"};
  int parallelism = 4;
  std::uint64_t seed = 0;

  ParaphraseConfig sage;
  AttackConfig attack;
  bool want_moments = true;
  std::string member_prefix;
  std::string nonmember_prefix;

  double fpr_target = 0.01;

  Attack audit_attack = Attack::kLoss;
  std::optional<double> tau_mia;
  double eps_rob = 0.05;
  std::optional<double> eps_util;

  ProviderConfig paraphraser;
  ProviderConfig tagger;
  ProviderConfig features;
  ProviderConfig scorer;

  // Throws Error{kConfig} when values are out of range or the corpus is
  // missing.
  void Validate() const;
  // The audit thresholds; Error{kConfig} when tau_mia was not given.
  AuditConfig Audit() const;
  // Everything except credentials, for cache keys and report headers.
  nlohmann::json ToJson() const;
};

PipelineConfig LoadPipelineConfig(const std::string& path);
PipelineConfig ParsePipelineConfig(const std::string& text,
                                   const std::string& base_dir);

}  // namespace miaudit

#endif  // MIAUDIT_CONFIG_H_
