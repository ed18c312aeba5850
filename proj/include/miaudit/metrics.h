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
// Surface similarity (WordSim) and sparse-feature semantic similarity (SPS).

#ifndef MIAUDIT_METRICS_H_
#define MIAUDIT_METRICS_H_

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace miaudit {

class FeatureProvider;

// Lowercased maximal runs of ASCII letters, digits and apostrophes, in text
// order (duplicates kept). Every other byte separates tokens.
std::vector<std::string> WordTokenSequence(std::string_view text);

// The same tokens as a set.
std::set<std::string> WordTokens(std::string_view text);

// |A ∩ B| / |A ∪ B| over word token sets; two empty sets give 1.
double JaccardWords(std::string_view x, std::string_view y);

enum class NgramUnit { kWord3, kChar5 };

// Distinct n-grams of x that also occur in y, over the number of distinct
// n-grams of x. Not symmetric. Zero n-grams in x gives 0.
//
// kWord3: consecutive triples of WordTokenSequence.
// kChar5: five consecutive code points of the ASCII-lowercased raw text,
//         whitespace and punctuation included.
double NgramOverlap(std::string_view x, std::string_view y, NgramUnit unit);

// Mean of JaccardWords, NgramOverlap(kWord3) and NgramOverlap(kChar5).
double WordSim(std::string_view x, std::string_view y);

// Nonnegative sparse activation vector. Only active (strictly positive)
// entries are stored, with strictly increasing indices below dim().
class SparseFeatureVector {
 public:
  SparseFeatureVector() = default;
  // Throws Error{kValidation} if the invariants do not hold.
  SparseFeatureVector(std::uint32_t dim, std::vector<std::uint32_t> indices,
                      std::vector<double> values);

  std::uint32_t dim() const { return dim_; }
  std::span<const std::uint32_t> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }
  std::size_t nnz() const { return indices_.size(); }

  friend bool operator==(const SparseFeatureVector&,
                         const SparseFeatureVector&) = default;

 private:
  std::uint32_t dim_ = 0;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

// Cosine similarity in [0, 1]; 0 when either vector is empty. Throws
// Error{kDimensionMismatch} when dims differ.
double CosineSparse(const SparseFeatureVector& f, const SparseFeatureVector& g);

// Mean per-span cosine of provider features. Throws on K = 0, on a span-count
// mismatch, and wraps provider failures with the failing span index.
double Sps(std::span<const std::string> x_spans,
           std::span<const std::string> y_spans, FeatureProvider& provider);

struct MetricPair {
  double sps = 0.0;
  double wordsim = 0.0;
  double utility = 0.0;

  static MetricPair Make(double sps, double wordsim) {
    return MetricPair{sps, wordsim, sps - wordsim};
  }
  friend bool operator==(const MetricPair&, const MetricPair&) = default;
};

}  // namespace miaudit

#endif  // MIAUDIT_METRICS_H_
