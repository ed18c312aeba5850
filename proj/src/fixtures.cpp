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
#include "miaudit/fixtures.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string_view>
#include <unordered_map>

#include "miaudit/error.h"
#include "miaudit/eval.h"
#include "miaudit/metrics.h"
#include "miaudit/paraphrase.h"
#include "miaudit/redaction.h"
#include "miaudit/util.h"

namespace miaudit::fixtures {

namespace {

namespace fs = std::filesystem;

// First entry of each class is the form used in generated source text.
constexpr std::array<std::array<std::string_view, 3>, 40> kSynonyms = {{
    {"study", "analysis", "investigation"},
    {"shows", "indicates", "reveals"},
    {"large", "substantial", "considerable"},
    {"small", "minor", "modest"},
    {"increase", "rise", "growth"},
    {"decrease", "decline", "drop"},
    {"method", "approach", "technique"},
    {"result", "outcome", "finding"},
    {"important", "significant", "notable"},
    {"quickly", "rapidly", "swiftly"},
    {"data", "records", "measurements"},
    {"team", "crew", "unit"},
    {"built", "constructed", "assembled"},
    {"used", "employed", "applied"},
    {"problem", "issue", "difficulty"},
    {"improve", "enhance", "strengthen"},
    {"city", "town", "municipality"},
    {"company", "firm", "enterprise"},
    {"report", "document", "account"},
    {"began", "started", "commenced"},
    {"finished", "completed", "concluded"},
    {"helped", "assisted", "supported"},
    {"changed", "altered", "modified"},
    {"clear", "evident", "apparent"},
    {"often", "frequently", "regularly"},
    {"many", "numerous", "countless"},
    {"model", "system", "framework"},
    {"test", "trial", "experiment"},
    {"effect", "impact", "influence"},
    {"goal", "aim", "objective"},
    {"new", "novel", "fresh"},
    {"old", "previous", "earlier"},
    {"careful", "thorough", "meticulous"},
    {"idea", "concept", "notion"},
    {"area", "region", "zone"},
    {"main", "primary", "principal"},
    {"needed", "required", "demanded"},
    {"process", "procedure", "routine"},
    {"simple", "basic", "straightforward"},
    {"review", "survey", "overview"},
}};

constexpr std::array<std::string_view, 10> kPeople = {
    "Alice Moreau", "Tomas Lindqvist", "Priya Raman",   "Kwame Mensah",
    "Elena Petrova", "Hiroshi Tanaka", "Sofia Almeida", "Liam O'Connor",
    "Fatima Zahra",  "Jonas Weber"};
constexpr std::array<std::string_view, 6> kOrgs = {
    "Quantix Labs",     "Northwind Analytics", "Helios Institute",
    "Borealis Systems", "Meridian Partners",   "Cobalt Foundry"};
constexpr std::array<std::string_view, 8> kPlaces = {
    "Lisbon", "Tromso", "Nairobi", "Osaka",
    "Valparaiso", "Krakow", "Hobart", "Quito"};
constexpr std::array<std::string_view, 12> kMonths = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

// {P} person, {O} organization, {L} place, {N} number, {D} date.
constexpr std::array<std::string_view, 12> kTemplates = {
    "In {D}, {P} of {O} began a careful study of the data from {L}.",
    "The main result shows a large increase of {N} units in the area.",
    "The team used a simple method to test each model, and the effect was "
    "clear.",
    "{P} noted that the old process often had a small problem with every "
    "report.",
    "A new idea helped the company improve the review that the city needed.",
    "The study finished quickly once the team built a new model for {L}.",
    "Many data points changed after the test, which was an important goal.",
    "The report shows a small decrease in the area near {L} after {D}.",
    "{O} used the main method often, and the result was clear to the team.",
    "A careful review of {N} records helped the team improve the process.",
    "The old model needed a simple change, so {P} began a new test.",
    "The effect of the idea was important for the company and the city.",
};

constexpr std::string_view kMarker = "zephyrmark";

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Uniform in [0, 1) from a hash; independent of the standard library's
// distribution implementations.
double Unit(std::uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double Uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  std::size_t Below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

 private:
  std::mt19937_64 gen_;
};

const std::unordered_map<std::string, std::size_t>& SynonymClass() {
  static const auto* index = [] {
    auto* m = new std::unordered_map<std::string, std::size_t>();
    for (std::size_t g = 0; g < kSynonyms.size(); ++g) {
      for (auto w : kSynonyms[g]) m->emplace(std::string(w), g);
    }
    return m;
  }();
  return *index;
}

std::string Format(const char* fmt, std::size_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string Fill(std::string_view tmpl, const std::map<char, std::string>& slots) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      out += slots.at(tmpl[i + 1]);
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

// ---- separable marker fixture ------------------------------------------

// Filler comes from a handful of words so nearly every text contains all of
// them; the marker is then the only token whose presence varies.
constexpr std::size_t kFillerWords = 8;

std::string FillerText(Rng& rng, bool marker) {
  const std::size_t words = 40 + rng.Below(21);
  const std::size_t marker_at = marker ? rng.Below(words) : words;
  std::string text;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) text += ' ';
    if (i == marker_at) {
      text += kMarker;
    } else {
      text += kSynonyms[rng.Below(kFillerWords)][0];
    }
  }
  return text + ".";
}

TokenScoreRecord SeparableRecord(const std::string& id, Variant variant,
                                 const std::string& text, bool member,
                                 const std::vector<double>& base,
                                 std::uint64_t seed) {
  TokenScoreRecord rec;
  rec.id = id;
  rec.variant = variant;
  rec.text_bytes = text.size();
  Rng rng(seed ^ Fnv1a(id + "/" + std::string(VariantName(variant))));
  for (double lp : base) {
    TokenScore t;
    switch (variant) {
      case Variant::kOriginal:
        t.logprob = lp;
        t.sigma = rng.Uniform(0.5, 1.5);
        t.mu = member ? lp - rng.Uniform(0.5, 1.5) : lp + rng.Uniform(0.5, 1.5);
        break;
      case Variant::kLowercase:
        t.logprob = member ? lp - rng.Uniform(0.5, 1.0) : lp + rng.Uniform(0.0, 0.3);
        break;
      case Variant::kPrefixedNonmember:
        t.logprob = lp * (member ? rng.Uniform(0.5, 0.8) : rng.Uniform(1.1, 1.3));
        break;
      case Variant::kPrefixedMember:
        t.logprob = lp * (member ? rng.Uniform(1.1, 1.3) : rng.Uniform(0.5, 0.8));
        break;
      case Variant::kReferenceModel:
        t.logprob = lp * (member ? rng.Uniform(1.5, 2.0) : rng.Uniform(0.6, 0.9));
        break;
    }
    rec.tokens.push_back(t);
  }
  return rec;
}

// ---- pipeline fixture ---------------------------------------------------

struct FixtureDoc {
  std::string id;
  Label label = Label::kNonmember;
  std::string markup;
  std::vector<FactualAnchor> anchors;
};

std::string Paragraph(Rng& rng, const std::map<char, std::string>& slots,
                      std::size_t sentences) {
  std::string out;
  for (std::size_t s = 0; s < sentences; ++s) {
    if (s) out += ' ';
    out += Fill(kTemplates[rng.Below(kTemplates.size())], slots);
  }
  return out;
}

FixtureDoc MakeFixtureDoc(std::size_t i, Rng& rng) {
  const std::string person(kPeople[rng.Below(kPeople.size())]);
  const std::string org(kOrgs[rng.Below(kOrgs.size())]);
  const std::string place(kPlaces[rng.Below(kPlaces.size())]);
  const std::string number = std::to_string(12 + rng.Below(976));
  const std::string date = std::string(kMonths[rng.Below(12)]) + " " +
                           std::to_string(2005 + rng.Below(19));
  const std::map<char, std::string> slots = {
      {'P', person}, {'O', org}, {'L', place}, {'N', number}, {'D', date}};

  FixtureDoc doc;
  doc.id = Format("doc-%02zu", i + 1);
  doc.label = i % 2 == 0 ? Label::kMember : Label::kNonmember;
  doc.markup =
      "<section type=\"structure\"># Field report " + std::to_string(i + 1) +
      ": " + place + "</section>\n<section type=\"narrative\">" +
      Paragraph(rng, slots, 3) +
      "</section>\n<section type=\"structure\">| site | samples |\n| " + place +
      " | " + number + " |</section>\n<section type=\"narrative\">" +
      Paragraph(rng, slots, 3) + "</section>\n";
  doc.anchors = {{person, FactKind::kEntity, std::nullopt},
                 {org, FactKind::kEntity, std::nullopt},
                 {place, FactKind::kEntity, "location"},
                 {number, FactKind::kNumber, std::nullopt},
                 {date, FactKind::kDate, std::nullopt}};
  return doc;
}

// Synonym substitution on the word level; punctuation and anchors (which are
// never synonym-class words) pass through.
std::string Reword(std::string_view text, double rate, std::uint64_t salt) {
  std::string out;
  std::size_t i = 0;
  std::size_t word_no = 0;
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      out += text[i++];
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
    std::string word(text.substr(i, j - i));
    const std::string lower = AsciiLower(word);
    auto it = SynonymClass().find(lower);
    const std::uint64_t h = Fnv1a(std::to_string(salt) + ":" + std::to_string(word_no++));
    if (it != SynonymClass().end() && Unit(h) < rate) {
      const auto& cls = kSynonyms[it->second];
      std::size_t cur = 0;
      while (cls[cur] != lower) ++cur;
      std::string repl(cls[(cur + 1 + (h >> 7) % 2) % 3]);
      if (std::isupper(static_cast<unsigned char>(word[0]))) {
        repl[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(repl[0])));
      }
      word = repl;
    }
    out += word;
    i = j;
  }
  return out;
}

// Moves the first sentence of a paragraph to its end.
std::string RotateSentences(const std::string& text) {
  const auto cut = text.find(". ");
  if (cut == std::string::npos) return text;
  return text.substr(cut + 2) + " " + text.substr(0, cut + 1);
}

std::string ParaphraseMarkup(const Document& source, std::size_t doc_index,
                             int run, int attempt) {
  static constexpr std::array<double, 3> kRates = {0.35, 0.7, 0.95};
  std::vector<Section> sections = source.sections;
  for (auto& s : sections) {
    if (s.kind != SectionKind::kNarrative) continue;
    std::string text = Reword(s.text, kRates[attempt - 1],
                              Fnv1a(source.id) + 100 * run + 10 * attempt + s.index);
    if (attempt == 3) text = RotateSentences(text);
    s.text = text;
  }
  // A few deliberately defective replies exercise the unevaluable path.
  if (attempt == 1 && doc_index % 5 == 1 && run == 1) {
    sections.front().text += " (rewritten)";
  }
  Document doc = MakeDocument(source.id, sections);
  doc.tagged = true;
  std::string markup = ToMarkup(doc);
  if (attempt == 1 && doc_index % 7 == 2) {
    markup = FlattenNarrative(doc);  // tags dropped: section layout mismatch
  }
  return markup;
}

std::string TagsResponse(const std::vector<FactualAnchor>& anchors) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : anchors) {
    nlohmann::json item = {{"value", a.value}, {"type", std::string(FactKindName(a.kind))}};
    if (a.notes) item["notes"] = *a.notes;
    arr.push_back(item);
  }
  return arr.dump();
}

void Write(const fs::path& path, const std::string& content,
           std::vector<std::string>& written) {
  WriteFileAtomic(path.string(), content);
  written.push_back(path.string());
}

}  // namespace

ScoredCorpus MakeSeparableFixture(std::size_t members, std::size_t nonmembers,
                                  std::uint64_t seed) {
  ScoredCorpus out;
  Rng rng(seed);
  const std::size_t n = members + nonmembers;
  for (std::size_t i = 0; i < n; ++i) {
    const bool member = i < members;
    LabeledExample ex;
    ex.id = Format("ex-%05zu", i);
    ex.label = member ? Label::kMember : Label::kNonmember;
    ex.text = FillerText(rng, member);
    const std::size_t tokens = WordTokenSequence(ex.text).size();
    std::vector<double> base(tokens);
    for (double& lp : base) {
      lp = member ? -rng.Uniform(0.05, 1.0) : -rng.Uniform(2.0, 4.0);
    }
    for (Variant v : kAllVariants) {
      out.records.push_back(SeparableRecord(ex.id, v, ex.text, member, base, seed));
    }
    out.corpus.examples.push_back(std::move(ex));
  }
  return out;
}

ScoredCorpus MakePermutedLabelFixture(std::size_t n, std::uint64_t seed) {
  ScoredCorpus out = MakeSeparableFixture(n / 2, n - n / 2, seed);
  std::vector<Label> labels;
  for (const auto& ex : out.corpus.examples) labels.push_back(ex.label);
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[gen() % i]);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.corpus.examples[i].label = labels[i];
  }
  return out;
}

SparseFeatureVector ConceptFeatures(std::string_view text, std::uint32_t dim) {
  std::map<std::uint32_t, double> counts;
  for (const std::string& token : WordTokenSequence(text)) {
    auto it = SynonymClass().find(token);
    const std::string root =
        it == SynonymClass().end() ? token : std::string(kSynonyms[it->second][0]);
    counts[static_cast<std::uint32_t>(Fnv1a("concept:" + root) % dim)] += 1.0;
    counts[static_cast<std::uint32_t>(Fnv1a("surface:" + token) % dim)] += 0.35;
  }
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  for (const auto& [i, v] : counts) {
    indices.push_back(i);
    values.push_back(v);
  }
  return SparseFeatureVector(dim, std::move(indices), std::move(values));
}

std::vector<SparseFeatureVector> ConceptFeatureProvider::Fetch(
    std::span<const std::string> texts) {
  std::vector<SparseFeatureVector> out;
  for (const auto& t : texts) out.push_back(ConceptFeatures(t));
  return out;
}

TokenScoreRecord SyntheticTokenScores(const ScoreRequest& request,
                                      const std::string& memorized_text,
                                      bool member) {
  std::vector<std::string> tokens = WordTokenSequence(request.text);
  if (tokens.empty()) tokens.push_back("");
  const std::set<std::string> memorized =
      member ? WordTokens(memorized_text) : std::set<std::string>{};
  const double difficulty = 0.75 + 0.5 * Unit(Fnv1a("doc:" + request.id));

  TokenScoreRecord rec;
  rec.id = request.id;
  rec.variant = request.variant;
  rec.text_bytes = request.text.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    const double base = -(0.4 + 3.0 * Unit(Fnv1a("tok:" + t))) * difficulty;
    const double noise =
        0.2 * (Unit(Fnv1a(request.id + "#" + std::to_string(i))) - 0.5);
    const double variant_noise =
        request.variant == Variant::kOriginal
            ? 0.0
            : 0.6 * (Unit(Fnv1a(request.id + "#" + std::to_string(i) + "#" +
                                std::string(VariantName(request.variant)))) -
                     0.5);
    const bool mem = memorized.contains(t);
    const double boosted = mem ? base * 0.7 : base;
    double lp = boosted;
    switch (request.variant) {
      case Variant::kOriginal: lp = boosted; break;
      case Variant::kLowercase: lp = mem ? base * 0.85 : base; break;
      case Variant::kPrefixedNonmember: lp = mem ? boosted * 0.9 : boosted; break;
      case Variant::kPrefixedMember: lp = mem ? boosted * 1.05 : boosted; break;
      case Variant::kReferenceModel: lp = base; break;
    }
    TokenScore ts;
    ts.logprob = std::min(lp + noise + variant_noise, -1e-6);
    if (request.variant == Variant::kOriginal && request.want_moments) {
      ts.mu = base * (1.0 + 0.2 * (Unit(Fnv1a("mu:" + t)) - 0.5));
      ts.sigma = 0.5 + Unit(Fnv1a("sigma:" + t));
    }
    rec.tokens.push_back(ts);
  }
  return rec;
}

std::vector<std::string> WritePipelineFixture(const std::string& dir,
                                              std::size_t documents,
                                              std::uint64_t seed) {
  const fs::path root(dir);
  const std::vector<std::string> runs = {"run1", "run2", "run3"};
  std::vector<std::string> written;
  Rng rng(seed);

  std::vector<FixtureDoc> docs;
  LabeledCorpus corpus;
  for (std::size_t i = 0; i < documents; ++i) {
    docs.push_back(MakeFixtureDoc(i, rng));
    corpus.examples.push_back({docs.back().id, docs.back().markup, docs.back().label});
  }
  Write(root / "corpus.jsonl", LabeledCorpusToJsonl(corpus), written);

  std::string tags;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (i == 3) {
      tags += DumpLine({{"id", docs[i].id}, {"attempt", 1},
                        {"response", "Sure! The facts are listed below."}});
      tags += DumpLine({{"id", docs[i].id}, {"attempt", 2},
                        {"response", TagsResponse(docs[i].anchors)}});
    } else {
      tags += DumpLine({{"id", docs[i].id}, {"attempt", 1},
                        {"response", TagsResponse(docs[i].anchors)}});
    }
  }
  Write(root / "tags.jsonl", tags, written);

  const std::string member_prefix =
      "The archive committee published its annual overview of regional field "
      "work.";
  const std::string nonmember_prefix =
      "Weather stations along the coast logged unusually calm conditions.";
  Write(root / "prefixes" / "member.txt", member_prefix, written);
  Write(root / "prefixes" / "nonmember.txt", nonmember_prefix, written);
  const RecallPrefixes prefixes{member_prefix, nonmember_prefix};

  std::vector<Document> originals;
  for (const auto& d : docs) originals.push_back(ParseSectionedDocument(d.id, d.markup));

  // Features cover every narrative span the pipeline can ask about.
  std::map<std::string, std::string> feature_lines;
  auto add_features = [&](const Document& doc) {
    for (const auto& span : NarrativeSpans(doc)) {
      feature_lines.emplace(Sha256Hex(span),
                            DumpLine(FeatureRecordToJson(span, ConceptFeatures(span))));
    }
  };
  for (const auto& d : originals) add_features(d);

  std::map<std::string, std::string> paraphrase_files;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::string lines;
    for (std::size_t i = 0; i < originals.size(); ++i) {
      for (int a = 1; a <= 3; ++a) {
        const std::string markup =
            ParaphraseMarkup(originals[i], i, static_cast<int>(r + 1), a);
        lines += DumpLine({{"id", originals[i].id}, {"attempt", a}, {"markup", markup}});
        try {
          add_features(ParseSectionedDocument(originals[i].id, markup));
        } catch (const Error&) {
        }
      }
    }
    paraphrase_files[runs[r]] = lines;
    Write(root / "paraphrases" / (runs[r] + ".jsonl"), lines, written);
  }
  std::string features;
  for (const auto& [_, line] : feature_lines) features += line;
  Write(root / "features.jsonl", features, written);

  // Regime texts, derived exactly as the pipeline derives them.
  auto scores_for = [&](const std::vector<std::pair<std::string, std::string>>& texts) {
    std::string out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const bool member = docs[i].label == Label::kMember;
      for (const auto& req : BuildScoreRequests(texts[i].first, texts[i].second,
                                                prefixes, true)) {
        out += DumpLine(TokenScoreRecordToJson(
            SyntheticTokenScores(req, PlainText(originals[i]), member)));
      }
    }
    return out;
  };

  ScriptedTagger tagger(tags, "tags.jsonl");
  std::vector<std::vector<FactualAnchor>> anchors;
  for (const auto& d : originals) anchors.push_back(ExtractFacts(d, tagger));

  std::vector<std::pair<std::string, std::string>> ft, ftf;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    ft.emplace_back(originals[i].id, PlainText(originals[i]));
    ftf.emplace_back(originals[i].id, BuildFtF(originals[i], anchors[i]).text);
  }
  Write(root / "scores" / "shared" / "FT.jsonl", scores_for(ft), written);
  Write(root / "scores" / "shared" / "FT-F.jsonl", scores_for(ftf), written);

  ConceptFeatureProvider oracle;
  ParaphraseConfig pcfg;
  for (const auto& run : runs) {
    ScriptedParaphraser paraphraser(paraphrase_files[run], run);
    std::vector<std::pair<std::string, std::string>> sage, sage_r;
    for (std::size_t i = 0; i < originals.size(); ++i) {
      const SageResult res = GenerateSage(originals[i], paraphraser, oracle, pcfg);
      sage.emplace_back(originals[i].id, PlainText(*res.chosen.doc));
      sage_r.emplace_back(originals[i].id, BuildSageR(*res.chosen.doc, anchors[i]).text);
    }
    Write(root / "scores" / run / "SAGE.jsonl", scores_for(sage), written);
    Write(root / "scores" / run / "SAGE-R.jsonl", scores_for(sage_r), written);
  }

  const std::string ini =
      "# Offline demo: every provider is file-backed.\n"
      "[dataset]\nname = synthetic\ncorpus = corpus.jsonl\n\n"
      "[run]\nruns = run1, run2, run3\noutput = out\nparallelism = 4\nseed = 0\n\n"
      "[sage]\nmax_attempts = 3\ntau_sps = 0.60\ntau_ov = 0.35\n\n"
      "[attack]\nk_percent = 20\nbow_folds = 5\n"
      "member_prefix = prefixes/member.txt\n"
      "nonmember_prefix = prefixes/nonmember.txt\n\n"
      "[eval]\nfpr_target = 0.01\n\n"
      "[audit]\nattack = Loss\ntau_mia = -1.6\neps_rob = 0.1\n\n"
      "[paraphraser]\nsource = file\npath = paraphrases/{run}.jsonl\n\n"
      "[tagger]\nsource = file\npath = tags.jsonl\n\n"
      "[features]\nsource = file\npath = features.jsonl\n\n"
      "[scorer]\nsource = file\npath = scores/{run}/{regime}.jsonl\n";
  Write(root / "pipeline.ini", ini, written);
  return written;
}

}  // namespace miaudit::fixtures
