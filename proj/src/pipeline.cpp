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

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

#include "miaudit/corpus.h"
#include "miaudit/error.h"
#include "miaudit/eval.h"
#include "miaudit/features.h"
#include "miaudit/http.h"
#include "miaudit/paraphrase.h"
#include "miaudit/protocol.h"
#include "miaudit/redaction.h"
#include "miaudit/scoring.h"
#include "miaudit/token_scorer.h"
#include "miaudit/util.h"

namespace miaudit {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kCacheVersion = 1;
constexpr std::string_view kShared = "shared";

// Runs fn(0..n-1) on up to `workers` threads. The exception of the lowest
// failing index is rethrown, so failures are reported deterministically.
void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t threads =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string Digest(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return "missing";
  return Sha256Hex(ReadFile(path));
}

Error WithContext(const Error& e, const std::string& context) {
  return Error(e.code(), context + ": " + e.what());
}

// ---- counting provider wrappers ------------------------------------------

class CountingParaphraser final : public ParaphraserProvider {
 public:
  CountingParaphraser(std::unique_ptr<ParaphraserProvider> inner,
                      std::atomic<std::size_t>& counter)
      : inner_(std::move(inner)), counter_(counter) {}
  std::string Complete(std::string_view prompt, const Document& source,
                       int attempt) override {
    ++counter_;
    return inner_->Complete(prompt, source, attempt);
  }

 private:
  std::unique_ptr<ParaphraserProvider> inner_;
  std::atomic<std::size_t>& counter_;
};

class CountingTagger final : public FactTagger {
 public:
  CountingTagger(std::unique_ptr<FactTagger> inner,
                 std::atomic<std::size_t>& counter)
      : inner_(std::move(inner)), counter_(counter) {}
  std::string Tag(const Document& doc, std::string_view narrative,
                  int attempt) override {
    ++counter_;
    return inner_->Tag(doc, narrative, attempt);
  }

 private:
  std::unique_ptr<FactTagger> inner_;
  std::atomic<std::size_t>& counter_;
};

class CountingScorer final : public TokenScorer {
 public:
  CountingScorer(std::unique_ptr<TokenScorer> inner,
                 std::atomic<std::size_t>& counter)
      : inner_(std::move(inner)), counter_(counter) {}
  TokenScoreRecord Score(const ScoreRequest& request) override {
    ++counter_;
    return inner_->Score(request);
  }

 private:
  std::unique_ptr<TokenScorer> inner_;
  std::atomic<std::size_t>& counter_;
};

// ---- artifacts -------------------------------------------------------------

struct ParsedDoc {
  Document doc;
  Label label = Label::kNonmember;
};

struct SageRecord {
  std::string id;
  Document doc;
  double sps = 0.0;
};

struct Unit {
  std::string run;  // run id or "shared"
  Regime regime = Regime::kFT;

  std::string Name() const { return run + "/" + std::string(RegimeName(regime)); }
};

std::string RelScores(const Unit& u) {
  return "scores/" + u.run + "/" + std::string(RegimeName(u.regime)) + ".jsonl";
}
std::string RelTexts(const Unit& u) {
  return "scores/" + u.run + "/" + std::string(RegimeName(u.regime)) +
         ".texts.jsonl";
}
std::string RelAttacks(const Unit& u) {
  return "attacks/" + u.run + "/" + std::string(RegimeName(u.regime)) + ".jsonl";
}
std::string RelSage(const std::string& run) { return "runs/" + run + "/sage.jsonl"; }
std::string RelSageR(const std::string& run) {
  return "runs/" + run + "/sage_r.jsonl";
}
constexpr std::string_view kRelDocuments = "parse/documents.jsonl";
constexpr std::string_view kRelTags = "tags/tags.jsonl";
constexpr std::string_view kRelFtF = "shared/ft_f.jsonl";
constexpr std::string_view kRelAvailability = "attacks/availability.json";
constexpr std::string_view kRelAudit = "audit/audit.jsonl";

json ProviderKey(const ProviderConfig& p, const std::string& path) {
  if (p.source == ProviderSource::kFile) {
    return {{"source", "file"}, {"digest", Digest(path)}};
  }
  return {{"source", "service"},
          {"url", p.endpoint.url},
          {"model", p.endpoint.model},
          {"reference_url", p.reference.url},
          {"reference_model", p.reference.model}};
}

}  // namespace

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kParse: return "parse";
    case Stage::kSage: return "sage";
    case Stage::kSageR: return "sage-r";
    case Stage::kFtF: return "ft-f";
    case Stage::kScore: return "score";
    case Stage::kAttack: return "attack";
    case Stage::kEval: return "eval";
    case Stage::kAudit: return "audit";
  }
  return "parse";
}

std::optional<Stage> ParseStage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (StageName(s) == name) return s;
  }
  return std::nullopt;
}

struct Pipeline::Impl {
  explicit Impl(const PipelineConfig& c) : cfg(c) {}

  const PipelineConfig& cfg;
  std::atomic<std::size_t> paraphraser_calls{0};
  std::atomic<std::size_t> tagger_calls{0};
  std::atomic<std::size_t> scorer_calls{0};
  std::unique_ptr<FeatureProvider> feature_upstream;
  std::unique_ptr<CachingFeatureProvider> features;

  std::string Path(std::string_view rel) const {
    return (fs::path(cfg.output_dir) / std::string(rel)).string();
  }

  std::string Require(std::string_view rel, Stage producer) const {
    const std::string path = Path(rel);
    if (!fs::is_regular_file(path)) {
      throw Error(ErrorCode::kIo, "missing input artifact " + std::string(rel) +
                                      "; run the '" +
                                      std::string(StageName(producer)) +
                                      "' stage first");
    }
    return path;
  }

  // ---- cache ---------------------------------------------------------------

  std::string CachePath(const std::string& unit) const {
    std::string name = unit;
    std::replace(name.begin(), name.end(), '/', '_');
    return Path(".cache/" + name + ".json");
  }

  std::string CacheKey(const std::string& unit, const std::vector<std::string>& inputs,
                       const json& settings) const {
    json in = json::array();
    for (const auto& p : inputs) in.push_back(Digest(p));
    return Sha256Hex(json{{"unit", unit},
                          {"version", kCacheVersion},
                          {"inputs", in},
                          {"settings", settings}}
                         .dump());
  }

  bool CacheHit(const std::string& unit, const std::string& key) const {
    const std::string path = CachePath(unit);
    if (!fs::is_regular_file(path)) return false;
    try {
      const json entry = json::parse(ReadFile(path));
      if (entry.at("key").get<std::string>() != key) return false;
      for (const auto& [rel, digest] : entry.at("outputs").items()) {
        if (Digest(Path(rel)) != digest.get<std::string>()) return false;
      }
      return true;
    } catch (const std::exception&) {
      return false;
    }
  }

  void CacheStore(const std::string& unit, const std::string& key,
                  const std::vector<std::string>& outputs) const {
    json out = json::object();
    for (const auto& rel : outputs) out[rel] = Digest(Path(rel));
    WriteFileAtomic(CachePath(unit), json{{"key", key}, {"outputs", out}}.dump(2) + "\n");
  }

  // Runs body unless the unit is cached. Returns true on a cache hit.
  bool Cached(const std::string& unit, const std::vector<std::string>& inputs,
              const json& settings, const std::vector<std::string>& outputs,
              const std::function<void()>& body) const {
    const std::string key = CacheKey(unit, inputs, settings);
    if (CacheHit(unit, key)) return true;
    body();
    CacheStore(unit, key, outputs);
    return false;
  }

  void WriteArtifact(std::string_view rel, const std::string& content) const {
    WriteFileAtomic(Path(rel), content);
  }

  // ---- providers -------------------------------------------------------------

  static void RequireService(const ProviderConfig& p, std::string_view section) {
    if (!p.endpoint.configured()) {
      throw Error(ErrorCode::kConfig, std::string(section) +
                                          ".url is required when source = service");
    }
    SplitUrl(p.endpoint.url);
  }

  static void RequireFile(const std::string& path, std::string_view section) {
    if (path.empty()) {
      throw Error(ErrorCode::kConfig,
                  std::string(section) + ".path is required when source = file");
    }
    if (!fs::is_regular_file(path)) {
      throw Error(ErrorCode::kConfig,
                  std::string(section) + " fixture not found: " + path);
    }
  }

  static void CheckProvider(const ProviderConfig& p, std::string_view section) {
    if (p.source == ProviderSource::kService) {
      RequireService(p, section);
    } else if (p.path.empty()) {
      throw Error(ErrorCode::kConfig,
                  std::string(section) + ".path is required when source = file");
    }
  }

  // Static provider checks for a stage, so a bad section fails before any
  // earlier stage has talked to a service.
  void Preflight(Stage stage) const {
    switch (stage) {
      case Stage::kSage:
        CheckProvider(cfg.paraphraser, "paraphraser");
        CheckProvider(cfg.features, "features");
        break;
      case Stage::kSageR:
      case Stage::kFtF:
        CheckProvider(cfg.tagger, "tagger");
        break;
      case Stage::kScore:
        CheckProvider(cfg.scorer, "scorer");
        break;
      default:
        break;
    }
  }

  std::string ParaphraserPath(const std::string& run) const {
    return cfg.paraphraser.PathFor(run, "SAGE");
  }
  std::string ScorerPath(const Unit& u) const {
    return cfg.scorer.PathFor(u.run, std::string(RegimeName(u.regime)));
  }

  std::unique_ptr<ParaphraserProvider> MakeParaphraser(std::size_t run_index) {
    const std::string& run = cfg.runs[run_index];
    std::unique_ptr<ParaphraserProvider> inner;
    if (cfg.paraphraser.source == ProviderSource::kFile) {
      RequireFile(ParaphraserPath(run), "paraphraser");
      inner = std::make_unique<ScriptedParaphraser>(ParaphraserPath(run));
    } else {
      RequireService(cfg.paraphraser, "paraphraser");
      ServiceEndpoint e = cfg.paraphraser.endpoint;
      if (!cfg.paraphraser.models.empty()) e.model = cfg.paraphraser.models[run_index];
      inner = std::make_unique<ChatParaphraser>(e);
    }
    return std::make_unique<CountingParaphraser>(std::move(inner), paraphraser_calls);
  }

  std::unique_ptr<FactTagger> MakeTagger() {
    std::unique_ptr<FactTagger> inner;
    if (cfg.tagger.source == ProviderSource::kFile) {
      RequireFile(cfg.tagger.path, "tagger");
      inner = std::make_unique<ScriptedTagger>(cfg.tagger.path);
    } else {
      RequireService(cfg.tagger, "tagger");
      inner = std::make_unique<ChatTagger>(cfg.tagger.endpoint);
    }
    return std::make_unique<CountingTagger>(std::move(inner), tagger_calls);
  }

  FeatureProvider& Features() {
    if (!features) {
      if (cfg.features.source == ProviderSource::kFile) {
        RequireFile(cfg.features.path, "features");
        feature_upstream = std::make_unique<FileFeatureProvider>(cfg.features.path);
      } else {
        RequireService(cfg.features, "features");
        feature_upstream = std::make_unique<ServiceFeatureProvider>(
            cfg.features.endpoint, static_cast<std::size_t>(cfg.parallelism));
      }
      features = std::make_unique<CachingFeatureProvider>(*feature_upstream);
    }
    return *features;
  }

  std::unique_ptr<TokenScorer> MakeScorer(const Unit& u) {
    std::unique_ptr<TokenScorer> inner;
    if (cfg.scorer.source == ProviderSource::kFile) {
      RequireFile(ScorerPath(u), "scorer");
      inner = std::make_unique<FileTokenScorer>(ScorerPath(u));
    } else {
      RequireService(cfg.scorer, "scorer");
      inner = std::make_unique<ServiceTokenScorer>(cfg.scorer.endpoint,
                                                   cfg.scorer.reference);
    }
    return std::make_unique<CountingScorer>(std::move(inner), scorer_calls);
  }

  // ---- artifact readers ------------------------------------------------------

  std::vector<ParsedDoc> LoadDocuments() const {
    const std::string path = Require(kRelDocuments, Stage::kParse);
    std::vector<ParsedDoc> docs;
    for (const auto& line : ReadJsonLines(path)) {
      const auto& j = line.value;
      ParsedDoc d;
      const std::string id = j.at("id").get<std::string>();
      d.doc = ParseSectionedDocument(id, j.at("markup").get<std::string>());
      d.label = *ParseLabel(j.at("label").get<std::string>());
      docs.push_back(std::move(d));
    }
    return docs;
  }

  std::vector<SageRecord> LoadSage(const std::string& run) const {
    const std::string path = Require(RelSage(run), Stage::kSage);
    std::vector<SageRecord> out;
    for (const auto& line : ReadJsonLines(path)) {
      const auto& j = line.value;
      SageRecord r;
      r.id = j.at("id").get<std::string>();
      r.doc = ParseSectionedDocument(r.id, j.at("markup").get<std::string>());
      r.sps = j.at("metrics").at("sps").get<double>();
      out.push_back(std::move(r));
    }
    return out;
  }

  std::map<std::string, std::vector<FactualAnchor>> LoadTags() const {
    const std::string path = Require(kRelTags, Stage::kSageR);
    std::map<std::string, std::vector<FactualAnchor>> out;
    for (const auto& line : ReadJsonLines(path)) {
      auto& anchors = out[line.value.at("id").get<std::string>()];
      for (const auto& a : line.value.at("anchors")) {
        FactualAnchor fa;
        fa.value = a.at("value").get<std::string>();
        fa.kind = *ParseFactKind(a.at("type").get<std::string>());
        if (a.contains("notes")) fa.notes = a.at("notes").get<std::string>();
        anchors.push_back(std::move(fa));
      }
    }
    return out;
  }

  std::vector<RedactedDocument> LoadRedacted(std::string_view rel, Stage producer) const {
    std::vector<RedactedDocument> out;
    for (const auto& line : ReadJsonLines(Require(rel, producer))) {
      out.push_back(RedactedDocumentFromJson(line.value));
    }
    return out;
  }

  std::vector<Unit> Units() const {
    std::vector<Unit> units = {{std::string(kShared), Regime::kFT},
                               {std::string(kShared), Regime::kFTF}};
    for (const auto& run : cfg.runs) {
      units.push_back({run, Regime::kSAGE});
      units.push_back({run, Regime::kSAGER});
    }
    return units;
  }

  // ---- stages ----------------------------------------------------------------

  StageOutcome Parse() {
    StageOutcome out{Stage::kParse, false, {std::string(kRelDocuments)}};
    out.cached = Cached("parse", {cfg.corpus}, json::object(), out.artifacts, [&] {
      const LabeledCorpus corpus = LoadLabeledCorpus(cfg.corpus);
      std::string lines;
      for (const auto& ex : corpus.examples) {
        Document doc;
        try {
          doc = ParseSectionedDocument(ex.id, ex.text);
        } catch (const Error& e) {
          throw WithContext(e, "document " + ex.id);
        }
        json kinds = json::array();
        for (const auto& s : doc.sections) kinds.push_back(SectionKindName(s.kind));
        lines += DumpLine({{"id", ex.id},
                           {"label", LabelName(ex.label)},
                           {"markup", SerializeDocument(doc)},
                           {"sections", kinds}});
      }
      WriteArtifact(kRelDocuments, lines);
    });
    return out;
  }

  json SageSettings() const {
    return {{"max_attempts", cfg.sage.max_attempts},
            {"tau_sps", cfg.sage.tau_sps},
            {"tau_ov", cfg.sage.tau_ov},
            {"prompt", cfg.sage.base_prompt}};
  }

  StageOutcome Sage() {
    StageOutcome out{Stage::kSage, true, {}};
    const std::string docs_path = Require(kRelDocuments, Stage::kParse);
    for (std::size_t r = 0; r < cfg.runs.size(); ++r) {
      const std::string& run = cfg.runs[r];
      const std::string rel = RelSage(run);
      out.artifacts.push_back(rel);
      json settings = SageSettings();
      settings["paraphraser"] = ProviderKey(cfg.paraphraser, ParaphraserPath(run));
      if (!cfg.paraphraser.models.empty()) settings["model"] = cfg.paraphraser.models[r];
      settings["features"] = ProviderKey(cfg.features, cfg.features.path);
      const bool hit = Cached("sage/" + run, {docs_path}, settings, {rel}, [&] {
        const auto docs = LoadDocuments();
        auto paraphraser = MakeParaphraser(r);
        FeatureProvider& features = Features();
        std::vector<std::string> lines(docs.size());
        ParallelFor(docs.size(), cfg.parallelism, [&](std::size_t i) {
          SageResult res;
          try {
            res = GenerateSage(docs[i].doc, *paraphraser, features, cfg.sage);
          } catch (const Error& e) {
            throw WithContext(e, run + "/" + docs[i].doc.id);
          }
          json attempts = json::array();
          for (const auto& c : res.all_attempts) {
            json a = {{"attempt", c.attempt}, {"accepted_early", c.accepted_early}};
            if (c.metrics) {
              a["sps"] = c.metrics->sps;
              a["wordsim"] = c.metrics->wordsim;
              a["utility"] = c.metrics->utility;
            } else {
              a["failure"] = c.failure;
            }
            attempts.push_back(a);
          }
          lines[i] = DumpLine({{"id", docs[i].doc.id},
                               {"label", LabelName(docs[i].label)},
                               {"chosen_attempt", res.chosen.attempt},
                               {"stopped_early", res.stopped_early},
                               {"paraphraser_calls", res.paraphraser_calls},
                               {"metrics",
                                {{"sps", res.chosen.metrics->sps},
                                 {"wordsim", res.chosen.metrics->wordsim},
                                 {"utility", res.chosen.metrics->utility}}},
                               {"markup", res.chosen.markup},
                               {"attempts", attempts}});
        });
        std::string content;
        for (const auto& l : lines) content += l;
        WriteArtifact(rel, content);
      });
      out.cached = out.cached && hit;
    }
    return out;
  }

  // Factual anchors for every document; shared by sage-r and ft-f.
  bool EnsureTags() {
    const std::string docs_path = Require(kRelDocuments, Stage::kParse);
    json settings = {{"tagger", ProviderKey(cfg.tagger, cfg.tagger.path)}};
    return Cached("tags", {docs_path}, settings, {std::string(kRelTags)}, [&] {
      const auto docs = LoadDocuments();
      auto tagger = MakeTagger();
      std::vector<std::string> lines(docs.size());
      ParallelFor(docs.size(), cfg.parallelism, [&](std::size_t i) {
        std::vector<std::string> warnings;
        std::vector<FactualAnchor> anchors;
        try {
          anchors = ExtractFacts(docs[i].doc, *tagger, 3, &warnings);
        } catch (const Error& e) {
          throw WithContext(e, "tagging " + docs[i].doc.id);
        }
        json arr = json::array();
        for (const auto& a : anchors) {
          json item = {{"value", a.value}, {"type", FactKindName(a.kind)}};
          if (a.notes) item["notes"] = *a.notes;
          arr.push_back(item);
        }
        lines[i] = DumpLine(
            {{"id", docs[i].doc.id}, {"anchors", arr}, {"warnings", warnings}});
      });
      std::string content;
      for (const auto& l : lines) content += l;
      WriteArtifact(kRelTags, content);
    });
  }

  StageOutcome SageR() {
    StageOutcome out{Stage::kSageR, EnsureTags(), {std::string(kRelTags)}};
    for (const auto& run : cfg.runs) {
      const std::string rel = RelSageR(run);
      out.artifacts.push_back(rel);
      const std::string sage_path = Require(RelSage(run), Stage::kSage);
      const bool hit =
          Cached("sage-r/" + run, {sage_path, Path(kRelTags)}, json::object(), {rel}, [&] {
            const auto tags = LoadTags();
            std::string content;
            for (const auto& rec : LoadSage(run)) {
              auto it = tags.find(rec.id);
              const std::vector<FactualAnchor> none;
              RedactedDocument red;
              try {
                red = BuildSageR(rec.doc, it == tags.end() ? none : it->second);
              } catch (const Error& e) {
                throw WithContext(e, run + "/" + rec.id);
              }
              content += DumpLine(RedactedDocumentToJson(red));
            }
            WriteArtifact(rel, content);
          });
      out.cached = out.cached && hit;
    }
    return out;
  }

  StageOutcome FtF() {
    StageOutcome out{Stage::kFtF, EnsureTags(),
                     {std::string(kRelTags), std::string(kRelFtF)}};
    const std::string docs_path = Require(kRelDocuments, Stage::kParse);
    const bool hit = Cached("ft-f", {docs_path, Path(kRelTags)}, json::object(),
                            {std::string(kRelFtF)}, [&] {
      const auto tags = LoadTags();
      std::string content;
      for (const auto& d : LoadDocuments()) {
        auto it = tags.find(d.doc.id);
        const std::vector<FactualAnchor> none;
        content += DumpLine(RedactedDocumentToJson(
            BuildFtF(d.doc, it == tags.end() ? none : it->second)));
      }
      WriteArtifact(kRelFtF, content);
    });
    out.cached = out.cached && hit;
    return out;
  }

  // The texts scored for one unit, with labels, in corpus order.
  LabeledCorpus UnitTexts(const Unit& u, const std::vector<ParsedDoc>& docs) const {
    std::map<std::string, std::string> text;
    switch (u.regime) {
      case Regime::kFT:
        for (const auto& d : docs) text[d.doc.id] = PlainText(d.doc);
        break;
      case Regime::kFTF:
        for (const auto& r : LoadRedacted(kRelFtF, Stage::kFtF)) text[r.id] = r.text;
        break;
      case Regime::kSAGE:
        for (const auto& r : LoadSage(u.run)) text[r.id] = PlainText(r.doc);
        break;
      case Regime::kSAGER:
        for (const auto& r : LoadRedacted(RelSageR(u.run), Stage::kSageR)) {
          text[r.id] = r.text;
        }
        break;
      default:
        throw Error(ErrorCode::kInvalidArgument, "regime not produced by this pipeline");
    }
    LabeledCorpus corpus;
    for (const auto& d : docs) {
      auto it = text.find(d.doc.id);
      if (it == text.end()) {
        throw Error(ErrorCode::kIo, u.Name() + " has no text for " + d.doc.id);
      }
      corpus.examples.push_back({d.doc.id, it->second, d.label});
    }
    return corpus;
  }

  std::string UnitTextSource(const Unit& u) const {
    switch (u.regime) {
      case Regime::kFT: return Require(kRelDocuments, Stage::kParse);
      case Regime::kFTF: return Require(kRelFtF, Stage::kFtF);
      case Regime::kSAGE: return Require(RelSage(u.run), Stage::kSage);
      default: return Require(RelSageR(u.run), Stage::kSageR);
    }
  }

  RecallPrefixes Prefixes() const {
    RecallPrefixes p;
    if (!cfg.member_prefix.empty()) p.member = ReadFile(cfg.member_prefix);
    if (!cfg.nonmember_prefix.empty()) p.nonmember = ReadFile(cfg.nonmember_prefix);
    return p;
  }

  StageOutcome Score() {
    StageOutcome out{Stage::kScore, true, {}};
    for (const Unit& u : Units()) {
      const std::string rel = RelScores(u);
      const std::string rel_texts = RelTexts(u);
      out.artifacts.push_back(rel);
      out.artifacts.push_back(rel_texts);
      std::vector<std::string> inputs = {Require(kRelDocuments, Stage::kParse),
                                         UnitTextSource(u)};
      for (const auto* p : {&cfg.member_prefix, &cfg.nonmember_prefix}) {
        if (!p->empty()) inputs.push_back(*p);
      }
      const json settings = {{"scorer", ProviderKey(cfg.scorer, ScorerPath(u))},
                             {"want_moments", cfg.want_moments},
                             {"member_prefix", !cfg.member_prefix.empty()},
                             {"nonmember_prefix", !cfg.nonmember_prefix.empty()}};
      const bool hit = Cached("score/" + u.Name(), inputs, settings, {rel, rel_texts}, [&] {
        const LabeledCorpus texts = UnitTexts(u, LoadDocuments());
        const RecallPrefixes prefixes = Prefixes();
        auto scorer = MakeScorer(u);
        std::vector<std::string> lines(texts.examples.size());
        ParallelFor(texts.examples.size(), cfg.parallelism, [&](std::size_t i) {
          const auto& ex = texts.examples[i];
          for (const auto& req :
               BuildScoreRequests(ex.id, ex.text, prefixes, cfg.want_moments)) {
            try {
              lines[i] += DumpLine(TokenScoreRecordToJson(scorer->Score(req)));
            } catch (const Error& e) {
              throw WithContext(e, u.Name() + "/" + ex.id);
            }
          }
        });
        std::string content;
        for (const auto& l : lines) content += l;
        WriteArtifact(rel, content);
        WriteArtifact(rel_texts, LabeledCorpusToJsonl(texts));
      });
      out.cached = out.cached && hit;
    }
    return out;
  }

  json AttackSettings() const {
    json signs = json::object();
    for (const auto& [a, s] : cfg.attack.sign) signs[std::string(AttackName(a))] = s;
    return {{"k_percent", cfg.attack.k_percent},
            {"zlib_level", cfg.attack.zlib_level},
            {"bow_folds", cfg.attack.bow_folds},
            {"seed", cfg.attack.seed},
            {"sign", signs}};
  }

  StageOutcome Attack() {
    StageOutcome out{Stage::kAttack, false, {}};
    std::vector<std::string> inputs;
    for (const Unit& u : Units()) {
      inputs.push_back(Require(RelScores(u), Stage::kScore));
      inputs.push_back(Require(RelTexts(u), Stage::kScore));
      out.artifacts.push_back(RelAttacks(u));
    }
    out.artifacts.push_back(std::string(kRelAvailability));
    out.cached = Cached("attack", inputs, AttackSettings(), out.artifacts, [&] {
      json availability = json::object();
      for (const Unit& u : Units()) {
        const LabeledCorpus texts = LoadLabeledCorpus(Path(RelTexts(u)));
        const auto bundles = BundleRecords(LoadTokenScoreRecords(Path(RelScores(u))));
        std::map<std::string, const RecordBundle*> by_id;
        for (const auto& b : bundles) by_id[b.id] = &b;

        std::string content;
        json avail = json::object();
        for (miaudit::Attack a : kAllAttacks) {
          std::vector<ScoredExample> scored;
          try {
            if (a == miaudit::Attack::kBagOfWords) {
              const auto scores = BagOfWordsScores(texts, cfg.attack);
              for (std::size_t i = 0; i < scores.size(); ++i) {
                scored.push_back({scores[i].id, a, scores[i].score,
                                  texts.examples[i].label});
              }
            } else {
              for (const auto& ex : texts.examples) {
                auto it = by_id.find(ex.id);
                if (it == by_id.end()) {
                  throw Error(ErrorCode::kUnavailable, "no token scores for " + ex.id);
                }
                scored.push_back({ex.id, a, ScoreAttack(a, *it->second, ex.text, cfg.attack).score,
                                  ex.label});
              }
            }
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kUnavailable) throw WithContext(e, u.Name());
            avail[std::string(AttackName(a))] = std::string("unavailable: ") + e.what();
            continue;
          }
          avail[std::string(AttackName(a))] = "available";
          for (const auto& s : scored) content += DumpLine(ScoredExampleToJson(s));
        }
        availability[u.Name()] = avail;
        WriteArtifact(RelAttacks(u), content);
      }
      WriteArtifact(kRelAvailability, availability.dump(2) + "\n");
    });
    return out;
  }

  std::map<miaudit::Attack, std::vector<ScoredExample>> LoadAttackScores(const Unit& u) const {
    std::map<miaudit::Attack, std::vector<ScoredExample>> out;
    for (auto& s : LoadScoredExamples(Require(RelAttacks(u), Stage::kAttack))) {
      out[s.attack].push_back(std::move(s));
    }
    return out;
  }

  StageOutcome Eval() {
    StageOutcome out{Stage::kEval, false, {}};
    std::vector<std::string> inputs;
    for (const Unit& u : Units()) inputs.push_back(Require(RelAttacks(u), Stage::kAttack));
    for (const auto& run : cfg.runs) out.artifacts.push_back("report/" + run + ".json");
    for (const char* ext : {"md", "tsv", "json"}) {
      out.artifacts.push_back(std::string("report/results.") + ext);
    }
    const json settings = {{"fpr_target", cfg.fpr_target}, {"dataset", cfg.dataset}};
    out.cached = Cached("eval", inputs, settings, out.artifacts, [&] {
      std::map<std::string, std::map<miaudit::Attack, std::vector<ScoredExample>>> scores;
      for (const Unit& u : Units()) scores[u.Name()] = LoadAttackScores(u);

      std::vector<ResultTable> tables;
      for (const auto& run : cfg.runs) {
        ResultTable table;
        table.provenance.push_back(run);
        for (const Unit& u : Units()) {
          if (u.run != kShared && u.run != run) continue;
          for (const auto& [attack, examples] : scores[u.Name()]) {
            try {
              table.Set(attack, u.regime, cfg.dataset,
                        {Auc(examples), TprAtFpr(examples, cfg.fpr_target)});
            } catch (const Error& e) {
              throw WithContext(e, u.Name() + "/" + std::string(AttackName(attack)));
            }
          }
        }
        WriteArtifact("report/" + run + ".json",
                      RenderReport(table, ReportFormat::kJson, cfg.fpr_target));
        tables.push_back(std::move(table));
      }
      const ResultTable avg = AggregateRuns(tables);
      WriteArtifact("report/results.md",
                    RenderReport(avg, ReportFormat::kMarkdown, cfg.fpr_target));
      WriteArtifact("report/results.tsv",
                    RenderReport(avg, ReportFormat::kTsv, cfg.fpr_target));
      WriteArtifact("report/results.json",
                    RenderReport(avg, ReportFormat::kJson, cfg.fpr_target));
    });
    return out;
  }

  StageOutcome Audit() {
    const AuditConfig audit_cfg = cfg.Audit();
    StageOutcome out{Stage::kAudit, false, {std::string(kRelAudit)}};
    std::vector<std::string> inputs;
    for (const Unit& u : Units()) {
      if (u.regime != Regime::kFTF) inputs.push_back(Require(RelAttacks(u), Stage::kAttack));
    }
    for (const auto& run : cfg.runs) inputs.push_back(Require(RelSage(run), Stage::kSage));
    json settings = AuditConfigToJson(audit_cfg);
    settings["attack"] = AttackName(cfg.audit_attack);
    out.cached = Cached("audit", inputs, settings, out.artifacts, [&] {
      auto score_map = [&](const Unit& u) {
        auto all = LoadAttackScores(u);
        auto it = all.find(cfg.audit_attack);
        if (it == all.end()) {
          throw Error(ErrorCode::kUnavailable,
                      std::string(AttackName(cfg.audit_attack)) +
                          " scores are unavailable for " + u.Name());
        }
        std::map<std::string, double> m;
        for (const auto& s : it->second) m[s.id] = s.score;
        return m;
      };
      struct Transform {
        std::string run;
        Regime regime;
        std::map<std::string, double> scores;
        std::map<std::string, double> sps;
      };
      std::vector<Transform> transforms;
      for (const auto& run : cfg.runs) {
        Transform sage{run, Regime::kSAGE, score_map({run, Regime::kSAGE}), {}};
        for (const auto& rec : LoadSage(run)) sage.sps[rec.id] = rec.sps;
        transforms.push_back(std::move(sage));
        transforms.push_back({run, Regime::kSAGER, score_map({run, Regime::kSAGER}), {}});
      }
      const auto original = score_map({std::string(kShared), Regime::kFT});
      std::string content;
      for (const auto& d : LoadDocuments()) {
        const std::string& id = d.doc.id;
        std::vector<double> scores_tx;
        json details = json::array();
        for (const auto& t : transforms) {
          const double s = t.scores.at(id);
          scores_tx.push_back(s);
          json item = {{"run", t.run}, {"regime", RegimeName(t.regime)}, {"score", s}};
          auto sps = t.sps.find(id);
          if (sps != t.sps.end()) {
            const EquivalenceCheck eq =
                CheckSemanticEquivalence(sps->second, std::nullopt, audit_cfg);
            item["sps"] = sps->second;
            item["semantic_equivalent"] = eq.equivalent;
            item["utility"] = UtilityStatusName(eq.utility);
          } else {
            item["sps"] = nullptr;
          }
          details.push_back(item);
        }
        const AuditReport report = miaudit::Audit(id, original.at(id), scores_tx, audit_cfg);
        json line = AuditReportToJson(report, audit_cfg);
        line["label"] = LabelName(d.label);
        line["attack"] = AttackName(cfg.audit_attack);
        line["transforms"] = details;
        content += DumpLine(line);
      }
      WriteArtifact(kRelAudit, content);
    });
    return out;
  }
};

Pipeline::Pipeline(PipelineConfig cfg)
    : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>(cfg_)) {
  cfg_.Validate();
}

Pipeline::~Pipeline() = default;

StageOutcome Pipeline::Run(Stage stage) {
  impl_->Preflight(stage);
  switch (stage) {
    case Stage::kParse: return impl_->Parse();
    case Stage::kSage: return impl_->Sage();
    case Stage::kSageR: return impl_->SageR();
    case Stage::kFtF: return impl_->FtF();
    case Stage::kScore: return impl_->Score();
    case Stage::kAttack: return impl_->Attack();
    case Stage::kEval: return impl_->Eval();
    case Stage::kAudit: return impl_->Audit();
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown stage");
}

std::vector<StageOutcome> Pipeline::RunAll() {
  // Fail on a missing audit threshold or endpoint before any provider is
  // contacted.
  cfg_.Audit();
  for (Stage s : kAllStages) impl_->Preflight(s);
  std::vector<StageOutcome> outcomes;
  for (Stage s : kAllStages) outcomes.push_back(Run(s));
  return outcomes;
}

ProviderCalls Pipeline::calls() const {
  ProviderCalls c;
  c.paraphraser = impl_->paraphraser_calls.load();
  c.tagger = impl_->tagger_calls.load();
  c.scorer = impl_->scorer_calls.load();
  c.features = impl_->features ? impl_->features->upstream_calls() : 0;
  return c;
}

json Pipeline::Summary(const std::vector<StageOutcome>& outcomes) const {
  json stages = json::array();
  for (const auto& o : outcomes) {
    stages.push_back({{"stage", StageName(o.stage)},
                      {"status", o.cached ? "cached" : "ran"},
                      {"artifacts", o.artifacts}});
  }
  const ProviderCalls c = calls();
  return {{"stages", stages},
          {"provider_calls",
           {{"paraphraser", c.paraphraser},
            {"tagger", c.tagger},
            {"features", c.features},
            {"scorer", c.scorer},
            {"total", c.total()}}},
          {"network_requests", HttpRequestCount()}};
}

}  // namespace miaudit
