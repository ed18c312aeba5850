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
#include "miaudit/pipeline.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "miaudit/config.h"
#include "miaudit/error.h"
#include "miaudit/eval.h"
#include "miaudit/fixtures.h"
#include "miaudit/http.h"
#include "miaudit/util.h"
#include "test_support.h"

namespace miaudit {
namespace {

using ::testing::HasSubstr;
using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kCli = MIAUDIT_CLI_PATH;

std::optional<ResultCell> CellOf(const ResultTable& table, Attack a, Regime r,
                                 const std::string& dataset) {
  auto row = table.rows.find(a);
  if (row == table.rows.end()) return std::nullopt;
  auto col = row->second.find(r);
  if (col == row->second.end()) return std::nullopt;
  auto cell = col->second.find(dataset);
  if (cell == col->second.end()) return std::nullopt;
  return cell->second;
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    fixtures::WritePipelineFixture(dir_.path().string());
    ini_ = dir_.Sub("pipeline.ini");
    out_ = dir_.path() / "out";
  }

  PipelineConfig Config() const { return LoadPipelineConfig(ini_); }

  std::size_t Lines(const std::string& rel) const {
    std::ifstream in(out_ / rel);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += line.empty() ? 0 : 1;
    return n;
  }

  miaudit_test::TempDir dir_;
  std::string ini_;
  fs::path out_;
};

TEST_F(PipelineTest, OfflineRunWritesEveryArtifact) {
  const std::size_t http_before = HttpRequestCount();
  Pipeline pipeline(Config());
  const auto outcomes = pipeline.RunAll();
  ASSERT_EQ(outcomes.size(), kAllStages.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    EXPECT_EQ(outcomes[i].stage, kAllStages[i]);
    EXPECT_FALSE(outcomes[i].cached) << StageName(outcomes[i].stage);
    for (const auto& rel : outcomes[i].artifacts) {
      EXPECT_TRUE(fs::is_regular_file(out_ / rel)) << rel;
    }
  }
  EXPECT_EQ(HttpRequestCount(), http_before);
  EXPECT_GT(pipeline.calls().paraphraser, 0u);
  EXPECT_GT(pipeline.calls().scorer, 0u);

  EXPECT_EQ(Lines("parse/documents.jsonl"), 20u);
  EXPECT_EQ(Lines("shared/ft_f.jsonl"), 20u);
  EXPECT_EQ(Lines("audit/audit.jsonl"), 20u);
  for (const char* run : {"run1", "run2", "run3"}) {
    EXPECT_EQ(Lines(std::string("runs/") + run + "/sage.jsonl"), 20u);
    EXPECT_EQ(Lines(std::string("runs/") + run + "/sage_r.jsonl"), 20u);
  }

  const json avail = json::parse(ReadFile((out_ / "attacks/availability.json").string()));
  for (const auto& [unit, attacks] : avail.items()) {
    EXPECT_EQ(attacks.size(), kAllAttacks.size()) << unit;
    for (const auto& [name, status] : attacks.items()) {
      EXPECT_EQ(status, "available") << unit << " " << name;
    }
  }

  const std::string md = ReadFile((out_ / "report/results.md").string());
  EXPECT_THAT(md, HasSubstr("## AUC"));
  EXPECT_THAT(md, HasSubstr("synthetic/FT"));
  EXPECT_THAT(md, HasSubstr("synthetic/SAGE-R"));
  EXPECT_THAT(md, HasSubstr("\nAverage |"));
  const ResultTable table =
      ParseJsonReport(ReadFile((out_ / "report/results.json").string()));
  EXPECT_TRUE(CellOf(table, Attack::kLoss, Regime::kFT, "synthetic").has_value());
  EXPECT_TRUE(CellOf(table, Attack::kBagOfWords, Regime::kFTF, "synthetic").has_value());

  for (const auto& line : ReadJsonLines((out_ / "audit/audit.jsonl").string())) {
    EXPECT_EQ(line.value.at("config").at("tau_mia"), -1.6);
    EXPECT_EQ(line.value.at("scores_transformed").size(), 6u);
  }
}

TEST_F(PipelineTest, SecondRunIsServedFromCache) {
  Pipeline(Config()).RunAll();
  const auto before = miaudit_test::Snapshot(out_);
  Pipeline again(Config());
  const auto outcomes = again.RunAll();
  for (const auto& o : outcomes) EXPECT_TRUE(o.cached) << StageName(o.stage);
  EXPECT_EQ(again.calls().total(), 0u);
  EXPECT_EQ(miaudit_test::Snapshot(out_), before);

  const json summary = again.Summary(outcomes);
  EXPECT_EQ(summary.at("provider_calls").at("total"), 0);
  for (const auto& s : summary.at("stages")) EXPECT_EQ(s.at("status"), "cached");
}

TEST_F(PipelineTest, FreshRunsAreByteIdentical) {
  Pipeline(Config()).RunAll();
  const auto first = miaudit_test::Snapshot(out_);
  fs::remove_all(out_);
  Pipeline(Config()).RunAll();
  EXPECT_EQ(miaudit_test::Snapshot(out_), first);

  // Stage by stage gives the same bytes as the chained run.
  fs::remove_all(out_);
  Pipeline staged(Config());
  for (Stage s : kAllStages) staged.Run(s);
  EXPECT_EQ(miaudit_test::Snapshot(out_), first);
}

TEST_F(PipelineTest, ChangedFixtureInvalidatesOnlyDownstreamStages) {
  Pipeline(Config()).RunAll();
  // Lower one logprob in the original-text scores.
  const fs::path scores = dir_.path() / "scores/shared/FT.jsonl";
  std::string content = ReadFile(scores.string());
  const auto eol = content.find('\n');
  json first = json::parse(content.substr(0, eol));
  auto& lp = first.at("tokens").at(0).at("logprob");
  lp = lp.get<double>() - 0.125;
  WriteFileAtomic(scores.string(), first.dump() + content.substr(eol));

  Pipeline again(Config());
  const auto outcomes = again.RunAll();
  std::map<Stage, bool> cached;
  for (const auto& o : outcomes) cached[o.stage] = o.cached;
  EXPECT_TRUE(cached[Stage::kParse]);
  EXPECT_TRUE(cached[Stage::kSage]);
  EXPECT_TRUE(cached[Stage::kSageR]);
  EXPECT_TRUE(cached[Stage::kFtF]);
  EXPECT_FALSE(cached[Stage::kScore]);
  EXPECT_FALSE(cached[Stage::kAttack]);
  EXPECT_EQ(again.calls().paraphraser, 0u);
  EXPECT_EQ(again.calls().tagger, 0u);
  EXPECT_GT(again.calls().scorer, 0u);
}

TEST_F(PipelineTest, MinKPlusPlusUnavailableWithoutMoments) {
  PipelineConfig cfg = Config();
  cfg.want_moments = false;
  Pipeline pipeline(cfg);
  pipeline.RunAll();
  const json avail = json::parse(ReadFile((out_ / "attacks/availability.json").string()));
  for (const auto& [unit, attacks] : avail.items()) {
    std::size_t available = 0;
    for (const auto& [name, status] : attacks.items()) {
      if (status == "available") {
        ++available;
      } else {
        EXPECT_EQ(name, "Min-K%++");
        EXPECT_THAT(status.get<std::string>(), HasSubstr("unavailable"));
      }
    }
    EXPECT_EQ(available, 8u) << unit;
    std::set<Attack> seen;
    for (const auto& s : LoadScoredExamples((out_ / "attacks" / (unit + ".jsonl")).string())) {
      seen.insert(s.attack);
    }
    EXPECT_EQ(seen.size(), 8u) << unit;
    EXPECT_FALSE(seen.contains(Attack::kMinKPlusPlus));
  }
  const ResultTable table =
      ParseJsonReport(ReadFile((out_ / "report/results.json").string()));
  EXPECT_FALSE(CellOf(table, Attack::kMinKPlusPlus, Regime::kFT, "synthetic").has_value());
}

TEST_F(PipelineTest, MissingEndpointFailsBeforeAnyRequest) {
  miaudit_test::MockServer server;
  std::atomic<int> hits{0};
  server.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  server.Start();

  PipelineConfig cfg = Config();
  cfg.paraphraser.source = ProviderSource::kService;
  cfg.paraphraser.endpoint.url = server.Url("/chat");
  cfg.scorer.source = ProviderSource::kService;
  cfg.scorer.endpoint.url.clear();
  const std::size_t http_before = HttpRequestCount();
  Pipeline pipeline(cfg);
  try {
    pipeline.RunAll();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_THAT(e.what(), HasSubstr("scorer.url"));
  }
  EXPECT_EQ(hits.load(), 0);
  EXPECT_EQ(HttpRequestCount(), http_before);
  EXPECT_EQ(pipeline.calls().total(), 0u);
  EXPECT_FALSE(fs::exists(out_ / "runs"));
}

TEST_F(PipelineTest, StageNeedsItsInputs) {
  Pipeline pipeline(Config());
  EXPECT_THROW(pipeline.Run(Stage::kAttack), Error);
  EXPECT_EQ(pipeline.calls().total(), 0u);
}

TEST(StageNamesTest, RoundTrip) {
  for (Stage s : kAllStages) EXPECT_EQ(ParseStage(StageName(s)), s);
  EXPECT_EQ(StageName(Stage::kSageR), "sage-r");
  EXPECT_EQ(StageName(Stage::kFtF), "ft-f");
  EXPECT_FALSE(ParseStage("everything").has_value());
}

// ---- command line ---------------------------------------------------------

std::string Cli(const std::string& args) {
  return miaudit_test::Quote(kCli) + " " + args;
}

json ErrorRecord(const std::string& err) {
  const auto line = err.substr(0, err.find('\n'));
  return json::parse(line);
}

TEST_F(PipelineTest, CliAllTwice) {
  const auto first = miaudit_test::RunCommand(Cli("all --config " + miaudit_test::Quote(ini_)));
  ASSERT_EQ(first.exit_code, 0) << first.err;
  const json s1 = json::parse(first.out);
  EXPECT_GT(s1.at("provider_calls").at("total").get<int>(), 0);
  EXPECT_EQ(s1.at("network_requests"), 0);

  const auto second = miaudit_test::RunCommand(Cli("all --config " + miaudit_test::Quote(ini_)));
  ASSERT_EQ(second.exit_code, 0) << second.err;
  const json s2 = json::parse(second.out);
  EXPECT_EQ(s2.at("provider_calls").at("total"), 0);
  for (const auto& st : s2.at("stages")) EXPECT_EQ(st.at("status"), "cached");
}

TEST_F(PipelineTest, CliSingleStagesAndOverrides) {
  const std::string cfg = " --config " + miaudit_test::Quote(ini_);
  auto r = miaudit_test::RunCommand(Cli("parse" + cfg + " --runs run1"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("stages").at(0).at("stage"), "parse");
  r = miaudit_test::RunCommand(Cli("attack" + cfg));
  EXPECT_NE(r.exit_code, 0);
  EXPECT_TRUE(ErrorRecord(r.err).contains("error"));
}

TEST(CliTest, ConfigErrorsExitWithCodeTwo) {
  miaudit_test::TempDir dir;
  auto r = miaudit_test::RunCommand(Cli("all --config " + dir.Sub("absent.ini")));
  EXPECT_EQ(r.exit_code, 2);
  json rec = ErrorRecord(r.err);
  EXPECT_EQ(rec.at("error").at("code"), "config");
  EXPECT_THAT(rec.at("error").at("message").get<std::string>(), HasSubstr("absent.ini"));

  std::ofstream(dir.Sub("bad.ini")) << "[sage]\nunknown = 1\n";
  r = miaudit_test::RunCommand(Cli("sage --config " + dir.Sub("bad.ini")));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(ErrorRecord(r.err).at("error").at("code"), "config");

  r = miaudit_test::RunCommand(Cli("eval"));
  EXPECT_EQ(r.exit_code, 2);

  r = miaudit_test::RunCommand(Cli("no-such-command"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(ErrorRecord(r.err).at("error").at("code"), "usage");
}

TEST(CliTest, StandaloneAttackAndEvalOnSeparableFixture) {
  miaudit_test::TempDir dir;
  const auto fixture = fixtures::MakeSeparableFixture(20, 20, 3);
  std::string records;
  for (auto rec : fixture.records) {
    for (auto& t : rec.tokens) t.mu = t.sigma = std::nullopt;
    records += DumpLine(TokenScoreRecordToJson(rec));
  }
  WriteFileAtomic(dir.Sub("records.jsonl"), records);
  WriteFileAtomic(dir.Sub("texts.jsonl"), LabeledCorpusToJsonl(fixture.corpus));

  auto r = miaudit_test::RunCommand(
      Cli("attack --records " + dir.Sub("records.jsonl") + " --texts " +
          dir.Sub("texts.jsonl") + " --out " + dir.Sub("scores.jsonl")));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json avail = json::parse(r.err).at("availability");
  EXPECT_THAT(avail.at("Min-K%++").get<std::string>(), HasSubstr("unavailable"));
  EXPECT_EQ(avail.at("Loss"), "available");
  std::set<Attack> seen;
  for (const auto& s : LoadScoredExamples(dir.Sub("scores.jsonl"))) seen.insert(s.attack);
  EXPECT_EQ(seen.size(), 8u);

  r = miaudit_test::RunCommand(Cli("eval --scores " + dir.Sub("scores.jsonl") +
                                   " --format json --dataset sep --regime PT"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const ResultTable table = ParseJsonReport(r.out);
  for (Attack a : seen) {
    const auto cell = CellOf(table, a, Regime::kPT, "sep");
    ASSERT_TRUE(cell.has_value()) << AttackName(a);
    EXPECT_EQ(cell->auc, 1.0) << AttackName(a);
  }
}

}  // namespace
}  // namespace miaudit
