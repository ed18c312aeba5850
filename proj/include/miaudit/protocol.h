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

// Audit harness for one suspect text: the membership decision on the
// original, the decisions on its transformations, and whether the attack is
// robust enough for those decisions to be trusted.

#ifndef MIAUDIT_PROTOCOL_H_
#define MIAUDIT_PROTOCOL_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace miaudit {

struct AuditConfig {
  double tau_mia = 0.0;
  double eps_rob = 0.0;
  double tau_sps = 0.60;
  std::optional<double> eps_util;

  // Throws Error{kConfig} unless eps_rob > 0 and every value is finite.
  void Validate() const;
};

// Member iff score >= tau_mia.
bool DecideMembership(double score, double tau_mia);

enum class UtilityStatus { kNotEvaluated, kPassed, kFailed };

std::string_view UtilityStatusName(UtilityStatus s);

struct EquivalenceCheck {
  bool equivalent = false;
  bool sps_passed = false;
  UtilityStatus utility = UtilityStatus::kNotEvaluated;
};

// sps >= tau_sps, and |utility_delta| <= eps_util when a delta is supplied.
// Throws Error{kConfig} for a delta without eps_util.
EquivalenceCheck CheckSemanticEquivalence(double sps,
                                          std::optional<double> utility_delta,
                                          const AuditConfig& cfg);

bool SemanticEquivalent(double sps, std::optional<double> utility_delta,
                        const AuditConfig& cfg);

struct AuditReport {
  std::string suspect_id;
  double score_original = 0.0;
  std::vector<double> scores_transformed;
  bool decision_original = false;
  std::vector<bool> decisions_transformed;
  double max_margin = 0.0;
  bool non_ambiguous = false;
  bool robust = false;

  // Every transformed decision equals the original one.
  bool decisions_agree() const;

  friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

// non_ambiguous is |score - tau_mia| >= eps_rob for member decisions and
// tau_mia - score > eps_rob otherwise, so that non_ambiguous && robust always
// implies agreement under the inclusive threshold.
// non_ambiguous and robust compare the exact differences, not their rounded
// values, so they agree with max_margin except when a margin rounds onto
// eps_rob. Throws Error{kInvalidArgument} for an empty transform list or
// non-finite scores.
AuditReport Audit(std::string suspect_id, double score_x,
                  const std::vector<double>& scores_tx, const AuditConfig& cfg);

nlohmann::json AuditConfigToJson(const AuditConfig& cfg);
// The report fields plus the config under "config".
nlohmann::json AuditReportToJson(const AuditReport& report,
                                 const AuditConfig& cfg);

}  // namespace miaudit

#endif  // MIAUDIT_PROTOCOL_H_
