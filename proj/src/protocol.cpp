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
#include "miaudit/protocol.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "miaudit/error.h"

namespace miaudit {

namespace {

// Sign of |a - b| - eps, evaluated exactly. A rounded difference can tie with
// eps while the true one is slightly smaller, which would let a transformed
// decision flip despite passing both checks; TwoSum recovers the lost part.
int CompareAbsDifference(double a, double b, double eps) {
  double s = a - b;
  const double bb = s - a;
  double e = (a - (s - bb)) + (-b - bb);
  if (s < 0.0 || (s == 0.0 && e < 0.0)) {
    s = -s;
    e = -e;
  }
  if (s != eps) return s < eps ? -1 : 1;
  return (e > 0.0) - (e < 0.0);
}

}  // namespace

void AuditConfig::Validate() const {
  if (!std::isfinite(tau_mia)) {
    throw Error(ErrorCode::kConfig, "tau_mia must be finite");
  }
  if (!(std::isfinite(eps_rob) && eps_rob > 0.0)) {
    throw Error(ErrorCode::kConfig, "eps_rob must be a finite value > 0");
  }
  if (!std::isfinite(tau_sps)) {
    throw Error(ErrorCode::kConfig, "tau_sps must be finite");
  }
  if (eps_util && !(std::isfinite(*eps_util) && *eps_util >= 0.0)) {
    throw Error(ErrorCode::kConfig, "eps_util must be a finite value >= 0");
  }
}

bool DecideMembership(double score, double tau_mia) { return score >= tau_mia; }

std::string_view UtilityStatusName(UtilityStatus s) {
  switch (s) {
    case UtilityStatus::kNotEvaluated: return "not_evaluated";
    case UtilityStatus::kPassed: return "passed";
    case UtilityStatus::kFailed: return "failed";
  }
  return "not_evaluated";
}

EquivalenceCheck CheckSemanticEquivalence(double sps,
                                          std::optional<double> utility_delta,
                                          const AuditConfig& cfg) {
  EquivalenceCheck check;
  check.sps_passed = sps >= cfg.tau_sps;
  if (utility_delta) {
    if (!cfg.eps_util) {
      throw Error(ErrorCode::kConfig,
                  "a utility delta was supplied but eps_util is not set");
    }
    check.utility = std::abs(*utility_delta) <= *cfg.eps_util
                        ? UtilityStatus::kPassed
                        : UtilityStatus::kFailed;
  }
  check.equivalent =
      check.sps_passed && check.utility != UtilityStatus::kFailed;
  return check;
}

bool SemanticEquivalent(double sps, std::optional<double> utility_delta,
                        const AuditConfig& cfg) {
  return CheckSemanticEquivalence(sps, utility_delta, cfg).equivalent;
}

bool AuditReport::decisions_agree() const {
  return std::all_of(decisions_transformed.begin(), decisions_transformed.end(),
                     [this](bool d) { return d == decision_original; });
}

AuditReport Audit(std::string suspect_id, double score_x,
                  const std::vector<double>& scores_tx, const AuditConfig& cfg) {
  cfg.Validate();
  if (scores_tx.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "audit of " + suspect_id + " needs at least one transformed score");
  }
  if (!std::isfinite(score_x) ||
      !std::all_of(scores_tx.begin(), scores_tx.end(),
                   [](double s) { return std::isfinite(s); })) {
    throw Error(ErrorCode::kInvalidArgument,
                "audit of " + suspect_id + " received a non-finite score");
  }
  AuditReport r;
  r.suspect_id = std::move(suspect_id);
  r.score_original = score_x;
  r.scores_transformed = scores_tx;
  r.decision_original = DecideMembership(score_x, cfg.tau_mia);
  for (double s : scores_tx) {
    r.decisions_transformed.push_back(DecideMembership(s, cfg.tau_mia));
    r.max_margin = std::max(r.max_margin, std::abs(score_x - s));
  }
  // Below the threshold the bound must be strict: score = tau - eps with a
  // transform landing exactly on tau would otherwise flip to member.
  const int gap = CompareAbsDifference(score_x, cfg.tau_mia, cfg.eps_rob);
  r.non_ambiguous = r.decision_original ? gap >= 0 : gap > 0;
  r.robust = std::all_of(scores_tx.begin(), scores_tx.end(), [&](double s) {
    return CompareAbsDifference(score_x, s, cfg.eps_rob) <= 0;
  });
  return r;
}

nlohmann::json AuditConfigToJson(const AuditConfig& cfg) {
  nlohmann::json j = {{"tau_mia", cfg.tau_mia},
                      {"eps_rob", cfg.eps_rob},
                      {"tau_sps", cfg.tau_sps}};
  j["eps_util"] = cfg.eps_util ? nlohmann::json(*cfg.eps_util) : nlohmann::json();
  return j;
}

nlohmann::json AuditReportToJson(const AuditReport& report,
                                 const AuditConfig& cfg) {
  return {{"suspect_id", report.suspect_id},
          {"score_original", report.score_original},
          {"scores_transformed", report.scores_transformed},
          {"decision_original", report.decision_original},
          {"decisions_transformed", report.decisions_transformed},
          {"max_margin", report.max_margin},
          {"non_ambiguous", report.non_ambiguous},
          {"robust", report.robust},
          {"config", AuditConfigToJson(cfg)}};
}

}  // namespace miaudit
