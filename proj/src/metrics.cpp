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
#include "miaudit/metrics.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "miaudit/error.h"
#include "miaudit/features.h"
#include "miaudit/kernels.h"
#include "miaudit/util.h"

namespace miaudit {

namespace {

bool IsWordByte(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '\'';
}

// Byte length of the UTF-8 sequence starting with lead byte c. Invalid lead
// bytes count as one byte so the split is total.
std::size_t CodePointLength(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c & 0xE0) == 0xC0) return 2;
  if ((c & 0xF0) == 0xE0) return 3;
  if ((c & 0xF8) == 0xF0) return 4;
  return 1;
}

std::set<std::string> WordTrigrams(std::string_view text) {
  std::vector<std::string> tokens = WordTokenSequence(text);
  std::set<std::string> grams;
  for (std::size_t i = 0; i + 3 <= tokens.size(); ++i) {
    // Tokens never contain a space, so it is an unambiguous joiner.
    grams.insert(tokens[i] + ' ' + tokens[i + 1] + ' ' + tokens[i + 2]);
  }
  return grams;
}

std::set<std::string> CharFivegrams(std::string_view text) {
  const std::string lower = AsciiLower(text);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < lower.size();) {
    starts.push_back(i);
    i += std::min(CodePointLength(static_cast<unsigned char>(lower[i])),
                  lower.size() - i);
  }
  starts.push_back(lower.size());
  std::set<std::string> grams;
  for (std::size_t i = 0; i + 5 < starts.size(); ++i) {
    grams.insert(lower.substr(starts[i], starts[i + 5] - starts[i]));
  }
  return grams;
}

double OverlapRatio(const std::set<std::string>& x,
                    const std::set<std::string>& y) {
  if (x.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& g : x) shared += y.count(g);
  return static_cast<double>(shared) / static_cast<double>(x.size());
}

}  // namespace

std::vector<std::string> WordTokenSequence(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!IsWordByte(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && IsWordByte(text[i])) ++i;
    tokens.push_back(AsciiLower(text.substr(start, i - start)));
  }
  return tokens;
}

std::set<std::string> WordTokens(std::string_view text) {
  std::vector<std::string> seq = WordTokenSequence(text);
  return {seq.begin(), seq.end()};
}

double JaccardWords(std::string_view x, std::string_view y) {
  const auto a = WordTokens(x);
  const auto b = WordTokens(y);
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double NgramOverlap(std::string_view x, std::string_view y, NgramUnit unit) {
  if (unit == NgramUnit::kWord3) {
    return OverlapRatio(WordTrigrams(x), WordTrigrams(y));
  }
  return OverlapRatio(CharFivegrams(x), CharFivegrams(y));
}

double WordSim(std::string_view x, std::string_view y) {
  return (JaccardWords(x, y) + NgramOverlap(x, y, NgramUnit::kWord3) +
          NgramOverlap(x, y, NgramUnit::kChar5)) /
         3.0;
}

SparseFeatureVector::SparseFeatureVector(std::uint32_t dim,
                                         std::vector<std::uint32_t> indices,
                                         std::vector<double> values)
    : dim_(dim), indices_(std::move(indices)), values_(std::move(values)) {
  if (dim_ == 0) throw Error(ErrorCode::kValidation, "feature dim must be > 0");
  if (indices_.size() != values_.size()) {
    throw Error(ErrorCode::kValidation,
                "feature indices and values differ in length");
  }
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] >= dim_) {
      throw Error(ErrorCode::kValidation, "feature index out of range");
    }
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw Error(ErrorCode::kValidation,
                  "feature indices must be strictly increasing");
    }
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      throw Error(ErrorCode::kValidation,
                  "feature values must be finite and strictly positive");
    }
  }
}

double CosineSparse(const SparseFeatureVector& f,
                    const SparseFeatureVector& g) {
  if (f.dim() != g.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature dims differ: " + std::to_string(f.dim()) + " vs " +
                    std::to_string(g.dim()));
  }
  if (f.nnz() == 0 || g.nnz() == 0) return 0.0;

  // Gather the shared support into contiguous buffers so the dot product runs
  // through the same kernel as the norms; for f == g this makes dot == norm²
  // bit-for-bit and the cosine exactly 1.
  std::vector<double> a;
  std::vector<double> b;
  const auto fi = f.indices();
  const auto gi = g.indices();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < fi.size() && j < gi.size()) {
    if (fi[i] < gi[j]) {
      ++i;
    } else if (gi[j] < fi[i]) {
      ++j;
    } else {
      a.push_back(f.values()[i++]);
      b.push_back(g.values()[j++]);
    }
  }
  if (a.empty()) return 0.0;
  const double dot = kernels::Dot(a, b);
  const double ff = kernels::Dot(f.values(), f.values());
  const double gg = kernels::Dot(g.values(), g.values());
  return std::clamp(dot / std::sqrt(ff * gg), 0.0, 1.0);
}

double Sps(std::span<const std::string> x_spans,
           std::span<const std::string> y_spans, FeatureProvider& provider) {
  if (x_spans.empty() || y_spans.empty()) {
    throw Error(ErrorCode::kNoEvaluablePairs, "SPS needs at least one span");
  }
  if (x_spans.size() != y_spans.size()) {
    throw Error(ErrorCode::kNoEvaluablePairs,
                "span count mismatch: " + std::to_string(x_spans.size()) +
                    " vs " + std::to_string(y_spans.size()));
  }
  double total = 0.0;
  for (std::size_t k = 0; k < x_spans.size(); ++k) {
    std::vector<SparseFeatureVector> pair;
    try {
      const std::string texts[2] = {x_spans[k], y_spans[k]};
      pair = provider.Fetch(texts);
    } catch (const Error& e) {
      throw Error(ErrorCode::kProvider, "feature provider failed on span " +
                                            std::to_string(k) + ": " + e.what());
    }
    if (pair.size() != 2) {
      throw Error(ErrorCode::kProvider,
                  "feature provider returned wrong count on span " +
                      std::to_string(k));
    }
    total += CosineSparse(pair[0], pair[1]);
  }
  return total / static_cast<double>(x_spans.size());
}

}  // namespace miaudit
