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
// Independent brute-force reference implementations used by the tests and
// the acceptance binary. They share no code with the library beyond its
// public data types; keep them slow and obvious.

#ifndef MIAUDIT_TESTS_ORACLES_H_
#define MIAUDIT_TESTS_ORACLES_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "miaudit/eval.h"
#include "miaudit/metrics.h"
#include "miaudit/redaction.h"

namespace miaudit_test {

// Word tokens via std::regex, lowercased.
std::vector<std::string> RegexWordTokens(std::string_view text);

double OracleJaccard(std::string_view x, std::string_view y);
double OracleWordTrigramOverlap(std::string_view x, std::string_view y);
double OracleCharFivegramOverlap(std::string_view x, std::string_view y);
double OracleWordSim(std::string_view x, std::string_view y);

// Expands both vectors to dense arrays and evaluates the textbook formula.
double DenseCosine(const miaudit::SparseFeatureVector& f,
                   const miaudit::SparseFeatureVector& g);

// Counts every (member, nonmember) pair: win 1, tie 1/2.
double PairCountingAuc(std::span<const miaudit::ScoredExample> examples);

// Tries every threshold at a nonmember score, just above the largest one,
// and -inf; keeps the best TPR among thresholds with FPR <= target.
double EnumeratedTprAtFpr(std::span<const miaudit::ScoredExample> examples,
                          double target);

// Distinct anchor values present in prose, ordered by their first raw
// occurrence. Only meaningful when no anchor overlaps another.
std::vector<std::string> FirstOccurrenceOrder(
    std::string_view prose, const std::vector<std::string>& anchors);

// Every "<<FACT_n>>" token found by regex, as byte ranges.
std::vector<miaudit::MaskSpan> RegexPlaceholderSpans(std::string_view text);

// True if any anchor value occurs in text at a position that does not lie
// entirely inside a placeholder token.
bool HasResidualAnchor(std::string_view text,
                       const std::vector<std::string>& anchors);

// Small deterministic generator helpers.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t Next() { return rng_(); }
  // Uniform integer in [lo, hi].
  std::size_t Int(std::size_t lo, std::size_t hi);
  double Uniform(double lo, double hi);
  bool Coin(double p = 0.5) { return Uniform(0.0, 1.0) < p; }
  template <typename T>
  const T& Pick(const std::vector<T>& items) {
    return items[Int(0, items.size() - 1)];
  }

  // One word drawn from a mixed vocabulary: ASCII, digits, apostrophes,
  // capitals and a few non-ASCII words.
  std::string Word();
  // n words joined by spaces and occasional punctuation.
  std::string Text(std::size_t n);
  miaudit::SparseFeatureVector Sparse(std::uint32_t dim, std::size_t max_nnz);
  // Scores, threshold and budget for the decision-agreement property. Mixes
  // dyadic grids (so |a - b| == eps ties happen exactly), continuous draws and
  // wide exponent gaps where the rounded difference lands on eps.
  struct AuditCase {
    double score = 0.0;
    double transformed = 0.0;
    double tau = 0.0;
    double eps = 0.0;
  };
  AuditCase RandomAuditCase();

 private:
  std::mt19937_64 rng_;
};

}  // namespace miaudit_test

#endif  // MIAUDIT_TESTS_ORACLES_H_
