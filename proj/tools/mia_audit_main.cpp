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
// Command-line front end. Pipeline subcommands take --config; attack and eval
// also work standalone on single files.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "miaudit/config.h"
#include "miaudit/error.h"
#include "miaudit/eval.h"
#include "miaudit/pipeline.h"
#include "miaudit/scoring.h"
#include "miaudit/util.h"

namespace {

using miaudit::Error;
using miaudit::ErrorCode;

int ReportError(std::string_view code, const std::string& message) {
  nlohmann::json record = {{"error", {{"code", code}, {"message", message}}}};
  std::cerr << record.dump() << "\n";
  return code == "config" ? 2 : 1;
}

struct Overrides {
  std::string config;
  std::optional<std::string> output;
  std::optional<int> parallelism;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> runs;
  std::optional<double> tau_mia;
  std::optional<double> eps_rob;
  std::optional<double> fpr_target;
  std::optional<double> k_percent;
};

miaudit::PipelineConfig LoadConfig(const Overrides& o) {
  if (o.config.empty()) {
    throw Error(ErrorCode::kConfig, "--config is required for pipeline subcommands");
  }
  miaudit::PipelineConfig cfg = miaudit::LoadPipelineConfig(o.config);
  if (o.output) cfg.output_dir = *o.output;
  if (o.parallelism) cfg.parallelism = *o.parallelism;
  if (o.seed) cfg.seed = cfg.attack.seed = *o.seed;
  if (o.runs) {
    cfg.runs.clear();
    std::string item;
    for (char c : *o.runs + ",") {
      if (c == ',') {
        if (!item.empty()) cfg.runs.push_back(item);
        item.clear();
      } else if (c != ' ') {
        item += c;
      }
    }
  }
  if (o.tau_mia) cfg.tau_mia = *o.tau_mia;
  if (o.eps_rob) cfg.eps_rob = *o.eps_rob;
  if (o.fpr_target) cfg.fpr_target = *o.fpr_target;
  if (o.k_percent) cfg.attack.k_percent = *o.k_percent;
  return cfg;
}

void Emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
  } else {
    miaudit::WriteFileAtomic(out_path, content);
  }
}

// attack --records R --texts T: long-format scores for one regime.
int StandaloneAttack(const std::string& records_path, const std::string& texts_path,
                     const std::string& out_path, const miaudit::AttackConfig& cfg) {
  const miaudit::LabeledCorpus texts = miaudit::LoadLabeledCorpus(texts_path);
  const auto bundles =
      miaudit::BundleRecords(miaudit::LoadTokenScoreRecords(records_path));
  std::map<std::string, const miaudit::RecordBundle*> by_id;
  for (const auto& b : bundles) by_id[b.id] = &b;

  std::string content;
  nlohmann::json availability = nlohmann::json::object();
  for (miaudit::Attack a : miaudit::kAllAttacks) {
    std::vector<miaudit::ScoredExample> scored;
    try {
      if (a == miaudit::Attack::kBagOfWords) {
        const auto s = miaudit::BagOfWordsScores(texts, cfg);
        for (std::size_t i = 0; i < s.size(); ++i) {
          scored.push_back({s[i].id, a, s[i].score, texts.examples[i].label});
        }
      } else {
        for (const auto& ex : texts.examples) {
          auto it = by_id.find(ex.id);
          if (it == by_id.end()) {
            throw Error(ErrorCode::kUnavailable, "no token scores for " + ex.id);
          }
          scored.push_back(
              {ex.id, a, miaudit::ScoreAttack(a, *it->second, ex.text, cfg).score,
               ex.label});
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnavailable) throw;
      availability[std::string(miaudit::AttackName(a))] =
          std::string("unavailable: ") + e.what();
      continue;
    }
    availability[std::string(miaudit::AttackName(a))] = "available";
    for (const auto& s : scored) content += miaudit::DumpLine(miaudit::ScoredExampleToJson(s));
  }
  Emit(out_path, content);
  std::cerr << nlohmann::json{{"availability", availability}}.dump() << "\n";
  return 0;
}

int StandaloneEval(const std::string& scores_path, const std::string& out_path,
                   const std::string& format_name, const std::string& dataset,
                   const std::string& regime_name, double fpr_target) {
  const auto format = miaudit::ParseReportFormat(format_name);
  if (!format) throw Error(ErrorCode::kConfig, "unknown format " + format_name);
  const auto regime = miaudit::ParseRegime(regime_name);
  if (!regime) throw Error(ErrorCode::kConfig, "unknown regime " + regime_name);
  std::map<miaudit::Attack, std::vector<miaudit::ScoredExample>> by_attack;
  for (auto& s : miaudit::LoadScoredExamples(scores_path)) {
    by_attack[s.attack].push_back(std::move(s));
  }
  miaudit::ResultTable table;
  table.provenance.push_back(scores_path);
  for (const auto& [attack, examples] : by_attack) {
    table.Set(attack, *regime, dataset,
              {miaudit::Auc(examples), miaudit::TprAtFpr(examples, fpr_target)});
  }
  Emit(out_path, miaudit::RenderReport(table, *format, fpr_target));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference audit toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("-c,--config", o.config, "Pipeline config file");
  app.add_option("--output", o.output, "Output directory (overrides run.output)");
  app.add_option("--parallelism", o.parallelism, "Worker threads per stage");
  app.add_option("--seed", o.seed, "Seed for fold assignment");
  app.add_option("--runs", o.runs, "Comma-separated paraphraser run ids");
  app.add_option("--tau-mia", o.tau_mia, "Audit decision threshold");
  app.add_option("--eps-rob", o.eps_rob, "Audit robustness budget");
  app.add_option("--fpr-target", o.fpr_target, "FPR budget for TPR@FPR");
  app.add_option("--k-percent", o.k_percent, "Min-K% / Min-K%++ percentage");

  std::map<std::string, CLI::App*> stage_cmds;
  for (miaudit::Stage s : miaudit::kAllStages) {
    const std::string name(miaudit::StageName(s));
    stage_cmds[name] = app.add_subcommand(name, "Run the " + name + " stage");
  }
  CLI::App* all = app.add_subcommand("all", "Run every stage in order");

  std::string records, texts, attack_out;
  stage_cmds["attack"]->add_option("--records", records,
                                    "Token-score records (standalone mode)");
  stage_cmds["attack"]->add_option("--texts", texts,
                                   "Scored texts as a labeled corpus (standalone mode)");
  stage_cmds["attack"]->add_option("--out", attack_out, "Output file, default stdout");

  std::string scores, eval_out, format = "markdown", dataset = "dataset", regime = "FT";
  stage_cmds["eval"]->add_option("--scores", scores, "Score file (standalone mode)");
  stage_cmds["eval"]->add_option("--out", eval_out, "Output file, default stdout");
  stage_cmds["eval"]->add_option("--format", format, "markdown, tsv or json");
  stage_cmds["eval"]->add_option("--dataset", dataset, "Dataset column label");
  stage_cmds["eval"]->add_option("--regime", regime, "Regime column label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return ReportError("usage", e.what());
  }

  try {
    if (stage_cmds["attack"]->parsed() && !records.empty()) {
      if (texts.empty()) throw Error(ErrorCode::kConfig, "--texts is required with --records");
      miaudit::AttackConfig cfg;
      if (o.k_percent) cfg.k_percent = *o.k_percent;
      if (o.seed) cfg.seed = *o.seed;
      return StandaloneAttack(records, texts, attack_out, cfg);
    }
    if (stage_cmds["eval"]->parsed() && !scores.empty()) {
      return StandaloneEval(scores, eval_out, format, dataset, regime,
                            o.fpr_target.value_or(0.01));
    }

    miaudit::Pipeline pipeline(LoadConfig(o));
    std::vector<miaudit::StageOutcome> outcomes;
    if (all->parsed()) {
      outcomes = pipeline.RunAll();
    } else {
      for (const auto& [name, cmd] : stage_cmds) {
        if (cmd->parsed()) outcomes.push_back(pipeline.Run(*miaudit::ParseStage(name)));
      }
    }
    std::cout << pipeline.Summary(outcomes).dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    return ReportError(miaudit::ErrorCodeName(e.code()), e.what());
  } catch (const std::exception& e) {
    return ReportError("internal", e.what());
  }
}
