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
// ROC, AUC, TPR at a fixed FPR, run aggregation and report rendering.

#ifndef MIAUDIT_EVAL_H_
#define MIAUDIT_EVAL_H_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "miaudit/corpus.h"
#include "miaudit/scoring.h"

namespace miaudit {

struct ScoredExample {
  std::string id;
  Attack attack = Attack::kLoss;
  double score = 0.0;
  Label label = Label::kNonmember;
};

nlohmann::json ScoredExampleToJson(const ScoredExample& e);
ScoredExample ScoredExampleFromJson(const nlohmann::json& j);
std::vector<ScoredExample> LoadScoredExamples(const std::string& path);

struct RocCurve {
  // (fpr, tpr) from (0, 0) to (1, 1); tied scores form a single step.
  std::vector<std::pair<double, double>> points;
};

// All functions below throw Error{kInvalidArgument} unless both labels are
// present and every score is finite.
RocCurve Roc(std::span<const ScoredExample> examples);

// Mann-Whitney estimate with ties counted 1/2; equals the trapezoidal area
// under Roc().
double Auc(std::span<const ScoredExample> examples);

// Conservative operating point: the decision threshold slides down through
// the nonmember scores and stops at the lowest one that keeps the empirical
// FPR <= target (or strictly above every nonmember if none does). Members at
// or above the threshold count as detected. Once the budget covers every
// nonmember (target >= 1), everything is accepted. No interpolation.
double TprAtFpr(std::span<const ScoredExample> examples, double target = 0.01);

enum class Regime { kFT, kSOFT, kSAGE, kSAGER, kPT, kFTF };

inline constexpr std::array<Regime, 6> kAllRegimes = {
    Regime::kFT, Regime::kSOFT, Regime::kSAGE,
    Regime::kSAGER, Regime::kPT, Regime::kFTF};

// "FT", "SOFT", "SAGE", "SAGE-R", "PT", "FT-F".
std::string_view RegimeName(Regime r);
std::optional<Regime> ParseRegime(std::string_view name);

struct ResultCell {
  double auc = 0.0;
  double tpr_at_fpr = 0.0;

  friend bool operator==(const ResultCell&, const ResultCell&) = default;
};

struct ResultTable {
  // attack -> regime -> dataset -> cell
  std::map<Attack, std::map<Regime, std::map<std::string, ResultCell>>> rows;
  std::vector<std::string> provenance;

  void Set(Attack a, Regime r, const std::string& dataset, ResultCell cell) {
    rows[a][r][dataset] = cell;
  }
  bool empty() const { return rows.empty(); }

  friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

// Cell-wise arithmetic mean, provenance concatenated in input order. Throws
// Error{kInvalidArgument} if the tables do not share one layout.
ResultTable AggregateRuns(std::span<const ResultTable> tables);

enum class ReportFormat { kTsv, kJson, kMarkdown };

std::optional<ReportFormat> ParseReportFormat(std::string_view name);

// Columns are grouped by dataset, regimes in the order FT, SOFT, SAGE,
// SAGE-R, PT, FT-F (only those present). Text formats round to 3 decimals and
// carry an Average row that leaves Bag-of-Words out; JSON keeps full
// precision and a top-level "schema" field.
std::string RenderReport(const ResultTable& table, ReportFormat format,
                         double fpr_target = 0.01);

ResultTable ParseJsonReport(std::string_view text);

inline constexpr std::string_view kReportSchema = "mia-audit.result-table/1";

}  // namespace miaudit

#endif  // MIAUDIT_EVAL_H_
