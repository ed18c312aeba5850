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
#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <set>

namespace miaudit_test {

namespace {

std::string Lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

// Straightforward UTF-8 decoder; input is assumed valid.
std::u32string Decode(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F)
                                                                 : (c & 0x07);
    for (int k = 1; k < len; ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

double Overlap(const std::set<std::vector<std::string>>& a,
               const std::set<std::vector<std::string>>& b) {
  if (a.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& g : a) hit += b.count(g);
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

std::set<std::vector<std::string>> WordTrigrams(std::string_view text) {
  auto t = RegexWordTokens(text);
  std::set<std::vector<std::string>> grams;
  for (std::size_t i = 0; i + 3 <= t.size(); ++i) {
    grams.insert({t[i], t[i + 1], t[i + 2]});
  }
  return grams;
}

std::set<std::u32string> CharFivegrams(std::string_view text) {
  std::u32string cps = Decode(Lower(std::string(text)));
  std::set<std::u32string> grams;
  for (std::size_t i = 0; i + 5 <= cps.size(); ++i) {
    grams.insert(cps.substr(i, 5));
  }
  return grams;
}

}  // namespace

std::vector<std::string> RegexWordTokens(std::string_view text) {
  static const std::regex kWord("[A-Za-z0-9']+");
  std::string s(text);
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kWord);
       it != std::sregex_iterator(); ++it) {
    out.push_back(Lower(it->str()));
  }
  return out;
}

double OracleJaccard(std::string_view x, std::string_view y) {
  auto tx = RegexWordTokens(x);
  auto ty = RegexWordTokens(y);
  std::set<std::string> a(tx.begin(), tx.end());
  std::set<std::string> b(ty.begin(), ty.end());
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::string> inter;
  std::vector<std::string> uni;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(uni));
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

double OracleWordTrigramOverlap(std::string_view x, std::string_view y) {
  return Overlap(WordTrigrams(x), WordTrigrams(y));
}

double OracleCharFivegramOverlap(std::string_view x, std::string_view y) {
  auto a = CharFivegrams(x);
  auto b = CharFivegrams(y);
  if (a.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& g : a) hit += b.count(g);
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

double OracleWordSim(std::string_view x, std::string_view y) {
  return (OracleJaccard(x, y) + OracleWordTrigramOverlap(x, y) +
          OracleCharFivegramOverlap(x, y)) /
         3.0;
}

double DenseCosine(const miaudit::SparseFeatureVector& f,
                   const miaudit::SparseFeatureVector& g) {
  std::vector<long double> a(f.dim(), 0.0L);
  std::vector<long double> b(g.dim(), 0.0L);
  for (std::size_t i = 0; i < f.nnz(); ++i) a[f.indices()[i]] = f.values()[i];
  for (std::size_t i = 0; i < g.nnz(); ++i) b[g.indices()[i]] = g.values()[i];
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

double PairCountingAuc(std::span<const miaudit::ScoredExample> examples) {
  std::uint64_t doubled = 0;
  std::uint64_t pairs = 0;
  for (const auto& m : examples) {
    if (m.label != miaudit::Label::kMember) continue;
    for (const auto& n : examples) {
      if (n.label != miaudit::Label::kNonmember) continue;
      ++pairs;
      if (m.score > n.score) doubled += 2;
      if (m.score == n.score) doubled += 1;
    }
  }
  return static_cast<double>(doubled) / static_cast<double>(2 * pairs);
}

double EnumeratedTprAtFpr(std::span<const miaudit::ScoredExample> examples,
                          double target) {
  std::vector<double> members;
  std::vector<double> nonmembers;
  for (const auto& e : examples) {
    (e.label == miaudit::Label::kMember ? members : nonmembers).push_back(e.score);
  }
  std::vector<double> thresholds = nonmembers;
  thresholds.push_back(std::nextafter(
      *std::max_element(nonmembers.begin(), nonmembers.end()),
      std::numeric_limits<double>::infinity()));
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  double best = 0.0;
  for (double t : thresholds) {
    std::size_t fp = 0;
    std::size_t tp = 0;
    for (double s : nonmembers) fp += s >= t ? 1 : 0;
    for (double s : members) tp += s >= t ? 1 : 0;
    const double fpr = static_cast<double>(fp) / nonmembers.size();
    if (fpr <= target) {
      best = std::max(best, static_cast<double>(tp) / members.size());
    }
  }
  return best;
}

std::vector<std::string> FirstOccurrenceOrder(
    std::string_view prose, const std::vector<std::string>& anchors) {
  std::vector<std::pair<std::size_t, std::string>> found;
  std::set<std::string> seen;
  for (const auto& a : anchors) {
    if (!seen.insert(a).second) continue;
    for (std::size_t i = 0; i + a.size() <= prose.size(); ++i) {
      if (prose.compare(i, a.size(), a) == 0) {
        found.emplace_back(i, a);
        break;
      }
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& [_, v] : found) out.push_back(v);
  return out;
}

std::vector<miaudit::MaskSpan> RegexPlaceholderSpans(std::string_view text) {
  static const std::regex kPlaceholder("<<FACT_[0-9]+>>");
  std::string s(text);
  std::vector<miaudit::MaskSpan> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kPlaceholder);
       it != std::sregex_iterator(); ++it) {
    const auto begin = static_cast<std::size_t>(it->position());
    out.push_back({begin, begin + static_cast<std::size_t>(it->length())});
  }
  return out;
}

bool HasResidualAnchor(std::string_view text,
                       const std::vector<std::string>& anchors) {
  std::vector<bool> inside(text.size(), false);
  for (const auto& span : RegexPlaceholderSpans(text)) {
    for (std::size_t i = span.begin; i < span.end; ++i) inside[i] = true;
  }
  for (const auto& a : anchors) {
    for (std::size_t i = 0; i + a.size() <= text.size(); ++i) {
      if (text.compare(i, a.size(), a) != 0) continue;
      bool covered = true;
      for (std::size_t k = i; k < i + a.size(); ++k) covered = covered && inside[k];
      if (!covered) return true;
    }
  }
  return false;
}

std::size_t Gen::Int(std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
}

double Gen::Uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

std::string Gen::Word() {
  static const std::vector<std::string> kVocab = {
      "the",   "cat",  "sat",     "on",     "mat",    "dog",    "ran",
      "fast",  "slow", "PDF",     "pdfbox", "don't",  "it's",   "2019",
      "v1.2",  "A-2b", "Map",     "set",    "café",   "naïve",  "日本",
      "data",  "ok",   "O'Brien", "x",      "y2k",    "zebra",  "under",
      "over",  "The",  "CAT",     "é",      "lorem",  "ipsum",  "dolor"};
  return Pick(kVocab);
}

std::string Gen::Text(std::size_t n) {
  static const std::vector<std::string> kGlue = {" ", " ", " ", ", ", ". ",
                                                 "; ", " - ", "\n"};
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += Pick(kGlue);
    out += Word();
  }
  return out;
}

miaudit::SparseFeatureVector Gen::Sparse(std::uint32_t dim, std::size_t max_nnz) {
  std::set<std::uint32_t> idx;
  const std::size_t nnz = Int(0, std::min<std::size_t>(max_nnz, dim));
  while (idx.size() < nnz) idx.insert(static_cast<std::uint32_t>(Int(0, dim - 1)));
  std::vector<std::uint32_t> indices(idx.begin(), idx.end());
  std::vector<double> values;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    values.push_back(Uniform(1e-3, 10.0));
  }
  return miaudit::SparseFeatureVector(dim, std::move(indices), std::move(values));
}

Gen::AuditCase Gen::RandomAuditCase() {
  auto grid = [&](int lo, int hi) {
    return static_cast<double>(static_cast<int>(Int(0, hi - lo)) + lo) / 64.0;
  };
  auto sign = [&] { return Coin() ? 1.0 : -1.0; };
  AuditCase c;
  switch (Int(0, 4)) {
    case 0:  // dyadic grid, arbitrary relation
      c.score = grid(-512, 512);
      c.tau = grid(-512, 512);
      c.eps = grid(1, 128);
      c.transformed = grid(-512, 512);
      break;
    case 1:  // exact boundary |score - tau| == eps, transform within eps
      c.score = grid(-512, 512);
      c.eps = grid(1, 128);
      c.tau = c.score + sign() * c.eps;
      c.transformed = c.score + sign() * c.eps * grid(0, 64);
      break;
    case 2:  // continuous
      c.score = Uniform(-10.0, 10.0);
      c.tau = Uniform(-10.0, 10.0);
      c.eps = Uniform(1e-6, 5.0);
      c.transformed = c.score + Uniform(-c.eps, c.eps) * (Coin() ? 1.0 : 3.0);
      break;
    case 3: {  // wide exponent gaps
      c.score = sign() * std::ldexp(1.0, static_cast<int>(Int(0, 6)) - 3);
      c.tau = sign() * std::ldexp(1.0, -static_cast<int>(Int(40, 70)));
      c.transformed = sign() * std::ldexp(1.0, -static_cast<int>(Int(40, 70)));
      c.eps = std::abs(c.score);
      const int nudge = static_cast<int>(Int(0, 2)) - 1;
      if (nudge < 0) c.eps = std::nextafter(c.eps, 0.0);
      if (nudge > 0) c.eps = std::nextafter(c.eps, 1e300);
      break;
    }
    default:  // rounded boundary built in floating point
      c.score = Uniform(-3.0, 3.0);
      c.eps = Uniform(1e-3, 1.0);
      c.tau = c.score + sign() * c.eps;
      c.transformed = c.score - (c.tau - c.score);
      break;
  }
  return c;
}

}  // namespace miaudit_test
