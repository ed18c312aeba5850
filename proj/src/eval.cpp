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
#include "miaudit/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "miaudit/error.h"
#include "miaudit/util.h"

namespace miaudit {

namespace {

struct LabelCounts {
  std::uint64_t members = 0;
  std::uint64_t nonmembers = 0;
};

LabelCounts CheckExamples(std::span<const ScoredExample> examples) {
  LabelCounts c;
  for (const auto& e : examples) {
    if (!std::isfinite(e.score)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-finite score for " + e.id);
    }
    (e.label == Label::kMember ? c.members : c.nonmembers)++;
  }
  if (c.members == 0 || c.nonmembers == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "evaluation needs both member and nonmember examples");
  }
  return c;
}

std::string Fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string PercentLabel(double fpr_target) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "TPR@%g%%FPR", fpr_target * 100.0);
  return buf;
}

using Column = std::pair<std::string, Regime>;

std::vector<Column> Columns(const ResultTable& table) {
  std::map<std::string, std::set<Regime>> present;
  for (const auto& [attack, by_regime] : table.rows) {
    for (const auto& [regime, by_dataset] : by_regime) {
      for (const auto& [dataset, _] : by_dataset) present[dataset].insert(regime);
    }
  }
  std::vector<Column> cols;
  for (const auto& [dataset, regimes] : present) {
    for (Regime r : kAllRegimes) {
      if (regimes.contains(r)) cols.emplace_back(dataset, r);
    }
  }
  return cols;
}

const ResultCell* Lookup(const ResultTable& table, Attack a, const Column& col) {
  auto ia = table.rows.find(a);
  if (ia == table.rows.end()) return nullptr;
  auto ir = ia->second.find(col.second);
  if (ir == ia->second.end()) return nullptr;
  auto id = ir->second.find(col.first);
  return id == ir->second.end() ? nullptr : &id->second;
}

// Text rendering of one metric as rows of cells.
std::vector<std::vector<std::string>> MetricGrid(const ResultTable& table,
                                                 const std::vector<Column>& cols,
                                                 bool tpr) {
  std::vector<std::vector<std::string>> grid;
  std::vector<double> sums(cols.size(), 0.0);
  std::vector<int> counts(cols.size(), 0);
  for (const auto& [attack, _] : table.rows) {
    std::vector<std::string> line{std::string(AttackName(attack))};
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const ResultCell* cell = Lookup(table, attack, cols[c]);
      if (!cell) {
        line.push_back("-");
        continue;
      }
      const double v = tpr ? cell->tpr_at_fpr : cell->auc;
      line.push_back(Fixed3(v));
      if (attack != Attack::kBagOfWords) {
        sums[c] += v;
        ++counts[c];
      }
    }
    grid.push_back(std::move(line));
  }
  if (std::any_of(counts.begin(), counts.end(), [](int n) { return n > 0; })) {
    std::vector<std::string> avg{"Average"};
    for (std::size_t c = 0; c < cols.size(); ++c) {
      avg.push_back(counts[c] ? Fixed3(sums[c] / counts[c]) : "-");
    }
    grid.push_back(std::move(avg));
  }
  return grid;
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> HeaderCells(const std::vector<Column>& cols) {
  std::vector<std::string> header{"Attack"};
  for (const auto& [dataset, regime] : cols) {
    header.push_back(dataset + "/" + std::string(RegimeName(regime)));
  }
  return header;
}

std::string RenderMarkdown(const ResultTable& table, double fpr_target) {
  const auto cols = Columns(table);
  const auto header = HeaderCells(cols);
  std::string out;
  for (bool tpr : {false, true}) {
    out += tpr ? "## " + PercentLabel(fpr_target) + "\n\n" : "## AUC\n\n";
    out += Join(header, " | ") + "\n";
    out += Join(std::vector<std::string>(header.size(), "---"), " | ") + "\n";
    for (const auto& line : MetricGrid(table, cols, tpr)) {
      out += Join(line, " | ") + "\n";
    }
    if (!tpr) out += "\n";
  }
  return out;
}

std::string RenderTsv(const ResultTable& table) {
  const auto cols = Columns(table);
  auto header = HeaderCells(cols);
  header.insert(header.begin(), "metric");
  std::string out = Join(header, "\t") + "\n";
  for (bool tpr : {false, true}) {
    for (auto line : MetricGrid(table, cols, tpr)) {
      line.insert(line.begin(), tpr ? "tpr_at_fpr" : "auc");
      out += Join(line, "\t") + "\n";
    }
  }
  return out;
}

std::string RenderJson(const ResultTable& table, double fpr_target) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [attack, by_regime] : table.rows) {
    for (const auto& [regime, by_dataset] : by_regime) {
      for (const auto& [dataset, cell] : by_dataset) {
        cells.push_back({{"attack", std::string(AttackName(attack))},
                         {"regime", std::string(RegimeName(regime))},
                         {"dataset", dataset},
                         {"auc", cell.auc},
                         {"tpr_at_fpr", cell.tpr_at_fpr}});
      }
    }
  }
  nlohmann::json doc = {{"schema", std::string(kReportSchema)},
                        {"fpr_target", fpr_target},
                        {"provenance", table.provenance},
                        {"cells", cells}};
  return doc.dump(2) + "\n";
}

// Mean that is exact for equal inputs and independent of input order.
double StableMean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double base = values.front();
  double spread = 0.0;
  for (double v : values) spread += v - base;
  return base + spread / static_cast<double>(values.size());
}

}  // namespace

nlohmann::json ScoredExampleToJson(const ScoredExample& e) {
  return {{"id", e.id},
          {"attack", std::string(AttackName(e.attack))},
          {"score", e.score},
          {"label", std::string(LabelName(e.label))}};
}

ScoredExample ScoredExampleFromJson(const nlohmann::json& j) {
  ScoredExample e;
  try {
    e.id = j.at("id").get<std::string>();
    auto attack = ParseAttack(j.at("attack").get<std::string>());
    auto label = ParseLabel(j.at("label").get<std::string>());
    if (!attack || !label) {
      throw Error(ErrorCode::kSchema, "unknown attack or label in score record");
    }
    e.attack = *attack;
    e.label = *label;
    e.score = j.at("score").get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kSchema, std::string("score record: ") + ex.what());
  }
  return e;
}

std::vector<ScoredExample> LoadScoredExamples(const std::string& path) {
  std::vector<ScoredExample> out;
  for (const JsonLine& line : ReadJsonLines(path)) {
    try {
      out.push_back(ScoredExampleFromJson(line.value));
    } catch (const Error& e) {
      throw Error(e.code(), path + ":" + std::to_string(line.line_number) +
                                ": " + e.what());
    }
  }
  return out;
}

RocCurve Roc(std::span<const ScoredExample> examples) {
  const LabelCounts counts = CheckExamples(examples);
  std::vector<const ScoredExample*> order;
  for (const auto& e : examples) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const ScoredExample* a, const ScoredExample* b) {
              return a->score > b->score;
            });
  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = order[i]->score;
    while (i < order.size() && order[i]->score == s) {
      (order[i]->label == Label::kMember ? tp : fp)++;
      ++i;
    }
    roc.points.emplace_back(static_cast<double>(fp) / counts.nonmembers,
                            static_cast<double>(tp) / counts.members);
  }
  return roc;
}

double Auc(std::span<const ScoredExample> examples) {
  const LabelCounts counts = CheckExamples(examples);
  std::vector<std::pair<double, bool>> sorted;
  sorted.reserve(examples.size());
  for (const auto& e : examples) {
    sorted.emplace_back(e.score, e.label == Label::kMember);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Twice the member rank sum, with tied groups sharing their midrank.
  std::uint64_t rank_sum_x2 = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    std::uint64_t members = 0;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) {
      members += sorted[j].second ? 1 : 0;
      ++j;
    }
    rank_sum_x2 += members * static_cast<std::uint64_t>(i + 1 + j);
    i = j;
  }
  const std::uint64_t u_x2 = rank_sum_x2 - counts.members * (counts.members + 1);
  return static_cast<double>(u_x2) /
         (2.0 * static_cast<double>(counts.members) *
          static_cast<double>(counts.nonmembers));
}

double TprAtFpr(std::span<const ScoredExample> examples, double target) {
  const LabelCounts counts = CheckExamples(examples);
  if (!(target >= 0.0 && target <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "FPR target must lie in [0, 1]");
  }
  if (target >= 1.0) return 1.0;

  std::vector<double> nonmember;
  std::vector<double> member;
  for (const auto& e : examples) {
    (e.label == Label::kMember ? member : nonmember).push_back(e.score);
  }
  std::sort(nonmember.begin(), nonmember.end(), std::greater<>());

  std::optional<double> threshold;
  for (std::size_t i = 0; i < nonmember.size();) {
    std::size_t j = i;
    while (j < nonmember.size() && nonmember[j] == nonmember[i]) ++j;
    const double fpr = static_cast<double>(j) / counts.nonmembers;
    if (fpr > target) break;
    threshold = nonmember[i];
    i = j;
  }

  std::uint64_t detected = 0;
  for (double s : member) {
    detected += threshold ? (s >= *threshold) : (s > nonmember.front());
  }
  return static_cast<double>(detected) / counts.members;
}

std::string_view RegimeName(Regime r) {
  switch (r) {
    case Regime::kFT: return "FT";
    case Regime::kSOFT: return "SOFT";
    case Regime::kSAGE: return "SAGE";
    case Regime::kSAGER: return "SAGE-R";
    case Regime::kPT: return "PT";
    case Regime::kFTF: return "FT-F";
  }
  return "FT";
}

std::optional<Regime> ParseRegime(std::string_view name) {
  for (Regime r : kAllRegimes) {
    if (RegimeName(r) == name) return r;
  }
  return std::nullopt;
}

ResultTable AggregateRuns(std::span<const ResultTable> tables) {
  if (tables.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no tables to aggregate");
  }
  auto layout = [](const ResultTable& t) {
    std::vector<std::tuple<Attack, Regime, std::string>> keys;
    for (const auto& [a, by_regime] : t.rows) {
      for (const auto& [r, by_dataset] : by_regime) {
        for (const auto& [d, _] : by_dataset) keys.emplace_back(a, r, d);
      }
    }
    return keys;
  };
  const auto keys = layout(tables.front());
  for (const auto& t : tables.subspan(1)) {
    if (layout(t) != keys) {
      throw Error(ErrorCode::kInvalidArgument,
                  "result tables differ in attack/regime/dataset layout");
    }
  }

  ResultTable out;
  for (const auto& [a, r, d] : keys) {
    std::vector<double> aucs;
    std::vector<double> tprs;
    for (const auto& t : tables) {
      const ResultCell& c = t.rows.at(a).at(r).at(d);
      aucs.push_back(c.auc);
      tprs.push_back(c.tpr_at_fpr);
    }
    out.Set(a, r, d, {StableMean(aucs), StableMean(tprs)});
  }
  for (const auto& t : tables) {
    out.provenance.insert(out.provenance.end(), t.provenance.begin(),
                          t.provenance.end());
  }
  return out;
}

std::optional<ReportFormat> ParseReportFormat(std::string_view name) {
  if (name == "tsv") return ReportFormat::kTsv;
  if (name == "json") return ReportFormat::kJson;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  return std::nullopt;
}

std::string RenderReport(const ResultTable& table, ReportFormat format,
                         double fpr_target) {
  switch (format) {
    case ReportFormat::kTsv: return RenderTsv(table);
    case ReportFormat::kJson: return RenderJson(table, fpr_target);
    case ReportFormat::kMarkdown: return RenderMarkdown(table, fpr_target);
  }
  return {};
}

ResultTable ParseJsonReport(std::string_view text) {
  ResultTable table;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("schema").get<std::string>() != kReportSchema) {
      throw Error(ErrorCode::kSchema, "unsupported report schema");
    }
    table.provenance = doc.at("provenance").get<std::vector<std::string>>();
    for (const auto& c : doc.at("cells")) {
      auto a = ParseAttack(c.at("attack").get<std::string>());
      auto r = ParseRegime(c.at("regime").get<std::string>());
      if (!a || !r) throw Error(ErrorCode::kSchema, "unknown attack or regime");
      table.Set(*a, *r, c.at("dataset").get<std::string>(),
                {c.at("auc").get<double>(), c.at("tpr_at_fpr").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("report: ") + e.what());
  }
  return table;
}

}  // namespace miaudit
