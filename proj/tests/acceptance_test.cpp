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
// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every check compares the library against the independent oracles
// in oracles.h or against hand-computed values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "miaudit/corpus.h"
#include "miaudit/error.h"
#include "miaudit/eval.h"
#include "miaudit/fixtures.h"
#include "miaudit/metrics.h"
#include "miaudit/paraphrase.h"
#include "miaudit/protocol.h"
#include "miaudit/redaction.h"
#include "miaudit/scoring.h"
#include "miaudit/util.h"
#include "oracles.h"
#include "test_support.h"

namespace {

namespace fs = std::filesystem;
using namespace miaudit;  // NOLINT
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Collects the first few failure messages.
class Failures {
 public:
  void Add(const std::string& what) {
    if (count_++ < 3) msgs_ += (msgs_.empty() ? "" : "; ") + what;
  }
  bool any() const { return count_ > 0; }
  std::string Summary() const {
    return std::to_string(count_) + " failure(s): " + msgs_;
  }

 private:
  int count_ = 0;
  std::string msgs_;
};

std::string Fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

fs::path SourceDir() { return fs::path(MIAUDIT_SOURCE_DIR); }

// ---- 1 -------------------------------------------------------------------

Outcome WordSimOracle() {
  const auto start = Clock::now();
  miaudit_test::Gen gen(1);
  Failures f;
  for (int i = 0; i < 50; ++i) {
    const std::string x = gen.Text(gen.Int(5, 200));
    std::string y;
    if (gen.Coin()) {
      y = gen.Text(gen.Int(5, 200));
    } else {
      // Shares a prefix with x so the n-gram overlaps are nontrivial.
      y = x.substr(0, gen.Int(0, x.size())) + " " + gen.Text(gen.Int(5, 100));
    }
    const double got[4] = {JaccardWords(x, y), NgramOverlap(x, y, NgramUnit::kWord3),
                           NgramOverlap(x, y, NgramUnit::kChar5), WordSim(x, y)};
    const double want[4] = {miaudit_test::OracleJaccard(x, y),
                            miaudit_test::OracleWordTrigramOverlap(x, y),
                            miaudit_test::OracleCharFivegramOverlap(x, y),
                            miaudit_test::OracleWordSim(x, y)};
    for (int k = 0; k < 4; ++k) {
      if (!(std::abs(got[k] - want[k]) <= 1e-12)) {
        f.Add("pair " + std::to_string(i) + " component " + std::to_string(k) + ": " +
              Fmt(got[k]) + " vs " + Fmt(want[k]));
      }
    }
  }
  const double secs = Seconds(start);
  if (secs >= 1.0) f.Add("took " + Fmt(secs) + " s");
  if (f.any()) return {false, f.Summary()};
  char buf[96];
  std::snprintf(buf, sizeof buf, "50 pairs, 4 values each within 1e-12, %.3f s", secs);
  return {true, buf};
}

// ---- 2 -------------------------------------------------------------------

Outcome MetricIdentities() {
  Failures f;
  const LabeledCorpus corpus =
      LoadLabeledCorpus((SourceDir() / "fixtures/offline/corpus.jsonl").string());
  std::size_t docs = 0;
  fixtures::ConceptFeatureProvider features;
  for (const auto& ex : corpus.examples) {
    const Document doc = ParseSectionedDocument(ex.id, ex.text);
    for (const std::string& text : {ex.text, FlattenNarrative(doc)}) {
      // Needs at least one word trigram and one character 5-gram.
      if (WordTokenSequence(text).size() < 3 || text.size() < 5) continue;
      ++docs;
      if (WordSim(text, text) != 1.0) f.Add("word_sim(x,x) != 1 for " + ex.id);
    }
    const auto spans = NarrativeSpans(doc);
    if (spans.empty()) continue;
    const double sps = Sps(spans, spans, features);
    if (sps != 1.0) f.Add("SPS of identical spans = " + Fmt(sps) + " for " + ex.id);
  }
  miaudit_test::Gen gen(2);
  for (int i = 0; i < 100; ++i) {
    const auto dim = static_cast<std::uint32_t>(gen.Int(1, 64));
    const auto a = gen.Sparse(dim, 20);
    const auto b = gen.Sparse(dim, 20);
    const double got = CosineSparse(a, b);
    const double want = miaudit_test::DenseCosine(a, b);
    if (!(std::abs(got - want) <= 1e-12)) {
      f.Add("cosine fixture " + std::to_string(i) + ": " + Fmt(got) + " vs " + Fmt(want));
    }
  }
  if (f.any()) return {false, f.Summary()};
  return {true, std::to_string(docs) + " texts with word_sim(x,x)=1, 100 cosine fixtures, SPS(x,x)=1 on " +
                    std::to_string(corpus.examples.size()) + " docs"};
}

// ---- 3, 4 ----------------------------------------------------------------

std::vector<ScoredExample> RandomScores(miaudit_test::Gen& gen, bool ties) {
  const std::size_t n = gen.Int(2, 200);
  std::vector<ScoredExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool member = i == 0 ? true : i == 1 ? false : gen.Coin();
    const double s = ties ? static_cast<double>(gen.Int(0, 10)) / 2.0 : gen.Uniform(-4.0, 4.0);
    out.push_back({"e" + std::to_string(i), Attack::kLoss, s,
                   member ? Label::kMember : Label::kNonmember});
  }
  return out;
}

Outcome AucExactness() {
  miaudit_test::Gen gen(3);
  Failures f;
  int tie_free = 0;
  for (int i = 0; i < 100; ++i) {
    const auto set = RandomScores(gen, i % 4 != 3);
    const double got = Auc(set);
    const double want = miaudit_test::PairCountingAuc(set);
    if (got != want) f.Add("set " + std::to_string(i) + ": " + Fmt(got) + " vs " + Fmt(want));
    std::set<double> distinct;
    for (const auto& e : set) distinct.insert(e.score);
    if (distinct.size() == set.size()) {
      ++tie_free;
      auto neg = set;
      for (auto& e : neg) e.score = -e.score;
      if (std::abs(Auc(set) + Auc(neg) - 1.0) > 1e-12) {
        f.Add("complement fails on set " + std::to_string(i));
      }
    }
  }
  if (tie_free == 0) f.Add("no tie-free sets generated");
  if (f.any()) return {false, f.Summary()};
  return {true, "100 sets equal pair counting exactly; complement on " +
                    std::to_string(tie_free) + " tie-free sets"};
}

Outcome TprAtFprCheck() {
  miaudit_test::Gen gen(3);
  Failures f;
  for (int i = 0; i < 100; ++i) {
    const auto set = RandomScores(gen, i % 4 != 3);
    double prev = -1.0;
    for (int t = 0; t <= 100; ++t) {
      const double target = t / 100.0;
      const double got = TprAtFpr(set, target);
      if (got < prev) f.Add("not monotone on set " + std::to_string(i));
      prev = got;
      const double want = miaudit_test::EnumeratedTprAtFpr(set, target);
      if (got != want) {
        f.Add("set " + std::to_string(i) + " target " + Fmt(target) + ": " + Fmt(got) +
              " vs " + Fmt(want));
      }
    }
    if (TprAtFpr(set, 1.0) != 1.0) f.Add("target 1.0 below 1 on set " + std::to_string(i));
  }
  if (f.any()) return {false, f.Summary()};
  return {true, "100 sets x 101 targets match threshold enumeration; monotone; TPR(1.0)=1"};
}

// ---- 5 -------------------------------------------------------------------

std::map<Attack, std::vector<ScoredExample>> ScoreAll(const fixtures::ScoredCorpus& fx) {
  return miaudit_test::ScoreFixture(fx);
}

Outcome AttackSuite() {
  Failures f;
  const auto separable = fixtures::MakeSeparableFixture(40, 40, 0);
  const auto scored = ScoreAll(separable);
  if (scored.size() != kAllAttacks.size()) f.Add("not all attacks scored");
  for (const auto& [attack, examples] : scored) {
    for (const auto& e : examples) {
      if (!std::isfinite(e.score)) f.Add(std::string(AttackName(attack)) + " non-finite");
    }
    const double auc = Auc(examples);
    if (auc != 1.0) f.Add(std::string(AttackName(attack)) + " separable AUC " + Fmt(auc));
  }

  AttackConfig full;
  full.k_percent = 100.0;
  for (const auto& rec : separable.records) {
    if (rec.variant != Variant::kOriginal) continue;
    if (MinKScore(rec, full).score != LossScore(rec).score) {
      f.Add("min_k(100) != loss for " + rec.id);
    }
    const bool zero = LowercaseScore(rec, rec).score == 0.0 &&
                      RecallScore(rec, rec).score == 0.0 &&
                      ConRecallScore(rec, rec, rec).score == 0.0 &&
                      RatioScore(rec, rec).score == 0.0;
    if (!zero) f.Add("paired attack nonzero on identical operands for " + rec.id);
  }

  std::string spread;
  const auto permuted = ScoreAll(fixtures::MakePermutedLabelFixture(1000, 0));
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& [attack, examples] : permuted) {
    const double auc = Auc(examples);
    lo = std::min(lo, auc);
    hi = std::max(hi, auc);
    if (!(std::abs(auc - 0.5) <= 0.05)) {
      f.Add(std::string(AttackName(attack)) + " permuted AUC " + Fmt(auc));
    }
  }
  if (permuted.size() != kAllAttacks.size()) f.Add("permuted: not all attacks scored");
  if (f.any()) return {false, f.Summary()};
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "9 attacks finite, separable AUC 1.0 (Bag-of-Words out-of-fold), "
                "permuted n=1000 AUC in [%.3f, %.3f]", lo, hi);
  return {true, buf};
}

// ---- 6 -------------------------------------------------------------------

std::string Narr(const std::string& t) { return "<section type=\"narrative\">" + t + "</section>"; }
std::string Struct(const std::string& t) { return "<section type=\"structure\">" + t + "</section>"; }

ScriptedParaphraser Script(const std::string& id, const std::vector<std::string>& attempts) {
  std::string jsonl;
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    jsonl += DumpLine({{"id", id}, {"attempt", i + 1}, {"markup", attempts[i]}});
  }
  return ScriptedParaphraser(jsonl, "script");
}

Outcome SageLoop() {
  Failures f;
  const ParaphraseConfig cfg;
  if (cfg.tau_sps != 0.60 || cfg.tau_ov != 0.35 || cfg.max_attempts != 3) {
    f.Add("default thresholds differ");
  }
  {
    // sps 0.65 >= 0.60 and wordsim 0.30 <= 0.35: stops at once.
    Document src = ParseSectionedDocument("d", Struct("Header") + Narr("green lazy dog"));
    miaudit_test::MapFeatureProvider features;
    features.Add("green lazy dog", miaudit_test::Axis());
    features.Add("lazy dog the runs lazy", miaudit_test::AtCosine(0.65));
    auto para = Script("d", {Struct("Header") + Narr("lazy dog the runs lazy")});
    const SageResult r = GenerateSage(src, para, features, cfg);
    if (!r.stopped_early || r.chosen.attempt != 1 || para.calls() != 1) {
      f.Add("early-stop example");
    }
  }
  {
    // Never passes: utility argmax 0.35 at attempt 2.
    Document src = ParseSectionedDocument("d", Narr("aaaaa bbbbb"));
    miaudit_test::MapFeatureProvider features;
    features.Add("aaaaa bbbbb", miaudit_test::Axis());
    features.Add("xyzzy one", miaudit_test::AtCosine(0.10));
    features.Add("xyzzy two", miaudit_test::AtCosine(0.35));
    features.Add("xyzzy three", miaudit_test::AtCosine(0.20));
    auto para = Script("d", {Narr("xyzzy one"), Narr("xyzzy two"), Narr("xyzzy three")});
    const SageResult r = GenerateSage(src, para, features, cfg);
    if (r.stopped_early || r.chosen.attempt != 2 || para.calls() != 3) f.Add("argmax example");
  }

  // Randomized scripts against a replay driven by the oracle metrics.
  miaudit_test::Gen gen(6);
  int early = 0;
  int fallback = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::string head = "Header " + std::to_string(trial);
    const std::string s1 = gen.Text(gen.Int(3, 25));
    const std::string s2 = gen.Text(gen.Int(3, 25));
    Document src =
        ParseSectionedDocument("d", Struct(head) + Narr(s1) + Struct("Footer") + Narr(s2));
    miaudit_test::MapFeatureProvider features;
    const SparseFeatureVector ones(3, {0, 1, 2}, {1.0, 1.0, 1.0});
    features.Add(s1, ones);
    features.Add(s2, ones);
    std::map<std::string, SparseFeatureVector> vecs = {{s1, ones}, {s2, ones}};
    std::vector<std::string> markups;
    std::vector<std::optional<std::pair<double, double>>> expected;
    for (int a = 0; a < cfg.max_attempts; ++a) {
      if (gen.Int(0, 9) == 0) {
        markups.push_back(Struct(head) + Narr(s1) + Struct("Footer"));
        expected.push_back(std::nullopt);
        continue;
      }
      std::string c1 = gen.Coin() ? s1 + " " + gen.Text(gen.Int(0, 6)) : gen.Text(gen.Int(1, 20));
      std::string c2 = gen.Coin(0.3) ? s2 : gen.Text(gen.Int(1, 20));
      for (const std::string* c : {&c1, &c2}) {
        if (!vecs.contains(*c)) {
          auto v = gen.Sparse(3, 3);
          if (v.nnz() == 0) v = SparseFeatureVector(3, {0}, {1.0});
          vecs.emplace(*c, v);
          features.Add(*c, v);
        }
      }
      const double sps = (miaudit_test::DenseCosine(vecs.at(s1), vecs.at(c1)) +
                          miaudit_test::DenseCosine(vecs.at(s2), vecs.at(c2))) / 2.0;
      const double ws = (miaudit_test::OracleWordSim(s1, c1) +
                         miaudit_test::OracleWordSim(s2, c2)) / 2.0;
      markups.push_back(Struct(head) + Narr(c1) + Struct("Footer") + Narr(c2));
      expected.push_back(std::make_pair(sps, ws));
    }
    int want = 0;
    bool want_early = false;
    int want_calls = 0;
    double best = 0.0;
    for (int a = 0; a < cfg.max_attempts; ++a) {
      ++want_calls;
      if (!expected[a]) continue;
      const auto [sps, ws] = *expected[a];
      if (want == 0 || sps - ws > best + 1e-12) {
        best = sps - ws;
        want = a + 1;
      }
      if (sps >= cfg.tau_sps && ws <= cfg.tau_ov) {
        want = a + 1;
        want_early = true;
        break;
      }
    }
    auto para = Script("d", markups);
    const std::string tag = "trial " + std::to_string(trial);
    if (want == 0) {
      try {
        GenerateSage(src, para, features, cfg);
        f.Add(tag + ": expected no viable candidate");
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoViableCandidate) f.Add(tag + ": wrong error");
      }
      continue;
    }
    const SageResult r = GenerateSage(src, para, features, cfg);
    (want_early ? early : fallback) += 1;
    if (r.stopped_early != want_early || r.chosen.attempt != want ||
        r.paraphraser_calls != want_calls || r.paraphraser_calls > cfg.max_attempts) {
      f.Add(tag + ": chose " + std::to_string(r.chosen.attempt) + ", oracle " +
            std::to_string(want));
    }
    const Document& chosen = *r.chosen.doc;
    if (chosen.sections[0].text != head || chosen.sections[2].text != "Footer") {
      f.Add(tag + ": structure changed");
    }
  }
  if (early == 0 || fallback == 0) f.Add("replay did not exercise both branches");
  if (f.any()) return {false, f.Summary()};
  return {true, "scripted examples plus 200 oracle replays (" + std::to_string(early) +
                    " early stops, " + std::to_string(fallback) + " argmax), calls <= 3"};
}

// ---- 7 -------------------------------------------------------------------

Outcome Redaction() {
  Failures f;
  miaudit_test::Gen gen(7);
  auto anchor = [](std::size_t k) { return "ANCHOR" + std::to_string(k) + "K"; };
  std::size_t placeholders = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t pool = gen.Int(1, 8);
    std::string markup;
    const std::size_t sections = gen.Int(1, 5);
    bool has_narrative = false;
    for (std::size_t s = 0; s < sections; ++s) {
      const bool narrative = gen.Coin() || (s + 1 == sections && !has_narrative);
      has_narrative = has_narrative || narrative;
      std::string body;
      for (std::size_t w = gen.Int(1, 30); w > 0; --w) {
        body += (body.empty() ? "" : " ") +
                (gen.Coin(0.2) ? anchor(gen.Int(1, pool)) : gen.Word());
      }
      markup += (narrative ? Narr(body) : Struct(body)) + "\n";
    }
    const Document doc = ParseSectionedDocument("r", markup);
    std::vector<FactualAnchor> anchors;
    std::vector<std::string> values;
    for (std::size_t k = pool + 1; k >= 1; --k) {
      anchors.push_back({anchor(k), FactKind::kEntity, std::nullopt});
      values.push_back(anchor(k));
    }
    const std::string tag = "doc " + std::to_string(trial);
    const std::string prose = FlattenNarrative(doc);
    const auto want = miaudit_test::FirstOccurrenceOrder(prose, values);
    for (const bool ftf : {false, true}) {
      const RedactedDocument r = ftf ? BuildFtF(doc, anchors) : BuildSageR(doc, anchors);
      std::vector<std::string> got;
      for (std::size_t i = 0; i < r.plan.assignments.size(); ++i) {
        got.push_back(r.plan.assignments[i].anchor.value);
        if (r.plan.assignments[i].placeholder != Placeholder(i + 1)) f.Add(tag + ": numbering");
      }
      if (got != want) f.Add(tag + ": order differs from first-occurrence scan");
      if (miaudit_test::HasResidualAnchor(r.text, want)) f.Add(tag + ": residual anchor");
      if (r.mask_spans != miaudit_test::RegexPlaceholderSpans(r.text)) {
        f.Add(tag + ": mask spans do not tile the placeholders");
      }
      if (ApplyRedaction(r.text, r.plan).text != r.text) f.Add(tag + ": not idempotent");
      const RedactedDocument again = ftf ? BuildFtF(doc, anchors) : BuildSageR(doc, anchors);
      if (RedactedDocumentToJson(again).dump() != RedactedDocumentToJson(r).dump()) {
        f.Add(tag + ": rerun differs");
      }
      placeholders += r.mask_spans.size();
    }
  }
  if (f.any()) return {false, f.Summary()};
  return {true, "100 documents, SAGE-R and FT-F, " + std::to_string(placeholders) +
                    " placeholders checked against the scanner"};
}

// ---- 8 -------------------------------------------------------------------

Outcome RobustnessLemma() {
  Failures f;
  miaudit_test::Gen gen(8);
  int covered = 0;
  int upper_boundary = 0;
  int lower_boundary_flips = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto c = gen.RandomAuditCase();
    AuditConfig cfg;
    cfg.tau_mia = c.tau;
    cfg.eps_rob = c.eps;
    const AuditReport r = Audit("x", c.score, {c.transformed}, cfg);
    const bool flipped = DecideMembership(c.score, c.tau) != DecideMembership(c.transformed, c.tau);
    if (c.score < c.tau && c.tau - c.score == c.eps && c.transformed - c.score == c.eps) {
      if (flipped) ++lower_boundary_flips;
    }
    if (!(r.non_ambiguous && r.robust)) continue;
    ++covered;
    if (c.score - c.tau == c.eps) ++upper_boundary;
    if (!r.decisions_agree()) {
      f.Add("A=" + Fmt(c.score) + " A'=" + Fmt(c.transformed) + " tau=" + Fmt(c.tau) +
            " eps=" + Fmt(c.eps));
    }
  }
  {
    // Rounded margins: 1 - 2^-61 rounds to 1 = eps.
    AuditConfig cfg;
    cfg.tau_mia = std::ldexp(1.0, -60);
    cfg.eps_rob = 1.0;
    const AuditReport r = Audit("fp", 1.0, {std::ldexp(1.0, -61)}, cfg);
    if (r.non_ambiguous && r.robust && !r.decisions_agree()) f.Add("rounding counterexample");
  }
  if (upper_boundary == 0) f.Add("no |A - tau| = eps boundary case exercised");
  if (f.any()) return {false, f.Summary()};
  return {true, "10000 cases, " + std::to_string(covered) + " non-ambiguous and robust (" +
                    std::to_string(upper_boundary) +
                    " on the boundary), 0 counterexamples; below the threshold the bound "
                    "is strict (" + std::to_string(lower_boundary_flips) +
                    " generated A = tau - eps, A' = tau flips are excluded)"};
}

// ---- 9 -------------------------------------------------------------------

Outcome ReportFidelity() {
  Failures f;
  ResultTable t;
  t.Set(Attack::kLoss, Regime::kFT, "arxiv", {0.685, 0.05});
  t.Set(Attack::kLoss, Regime::kSAGE, "arxiv", {0.602, 0.02});
  t.Set(Attack::kLoss, Regime::kSAGER, "arxiv", {0.559, 0.01});
  t.Set(Attack::kZlib, Regime::kFT, "arxiv", {0.671, 0.04});
  t.provenance = {"fixture"};
  const std::string md = RenderReport(t, ReportFormat::kMarkdown);
  if (md.find("\nLoss | 0.685 | 0.602 | 0.559\n") == std::string::npos) {
    f.Add("markdown row missing");
  }
  const std::string tsv = RenderReport(t, ReportFormat::kTsv);
  if (tsv.find("auc\tLoss\t0.685\t0.602\t0.559\n") == std::string::npos) f.Add("tsv row missing");
  if (!(ParseJsonReport(RenderReport(t, ReportFormat::kJson)) == t)) f.Add("json round trip");
  if (f.any()) return {false, f.Summary()};
  return {true, "Loss row renders 0.685 / 0.602 / 0.559; json round-trips"};
}

// ---- 10 ------------------------------------------------------------------

Outcome FullOfflineRun() {
  Failures f;
  miaudit_test::TempDir dir;
  fs::copy(SourceDir() / "fixtures/offline", dir.path(), fs::copy_options::recursive);
  const fs::path out = dir.path() / "out";
  fs::remove_all(out);
  const std::string cmd = miaudit_test::Quote(MIAUDIT_CLI_PATH) + " all --config " +
                          miaudit_test::Quote(dir.Sub("pipeline.ini"));
  double slowest = 0.0;
  std::map<std::string, std::string> first;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(out);
    const auto start = Clock::now();
    const auto r = miaudit_test::RunCommand(cmd);
    const double secs = Seconds(start);
    slowest = std::max(slowest, secs);
    if (r.exit_code != 0) {
      f.Add("exit " + std::to_string(r.exit_code) + ": " + r.err);
      break;
    }
    const auto summary = nlohmann::json::parse(r.out);
    if (summary.at("network_requests") != 0) f.Add("network requests issued");
    if (secs >= 60.0) f.Add("run took " + Fmt(secs) + " s");
    auto snap = miaudit_test::Snapshot(out);
    if (run == 0) {
      first = std::move(snap);
    } else if (snap != first) {
      f.Add("second run differs");
    }
  }
  if (f.any()) return {false, f.Summary()};
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "`all` on 20 documents, zero network, %zu artifacts byte-identical, "
                "slowest run %.2f s", first.size(), slowest);
  return {true, buf};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"WordSim oracle equivalence", WordSimOracle},
      {"Metric identities", MetricIdentities},
      {"AUC exactness", AucExactness},
      {"TPR@FPR", TprAtFprCheck},
      {"Attack suite determinism and calibration", AttackSuite},
      {"SAGE loop", SageLoop},
      {"SAGE-R/FT-F", Redaction},
      {"Robustness lemma", RobustnessLemma},
      {"Report fidelity", ReportFidelity},
      {"Full offline run", FullOfflineRun},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.ok ? 0 : 1;
    std::cout << (o.ok ? "PASS" : "FAIL") << "  " << name << " -- " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
