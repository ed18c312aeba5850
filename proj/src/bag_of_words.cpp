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
// Lexical control attack: L2-regularized logistic regression over binary
// word-presence features, scored out of fold.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "miaudit/error.h"
#include "miaudit/kernels.h"
#include "miaudit/metrics.h"
#include "miaudit/scoring.h"

namespace miaudit {

namespace {

constexpr std::size_t kVocabularySize = 5000;
constexpr double kL2 = 1e-2;
constexpr double kGradientTolerance = 1e-5;
constexpr int kMaxIterations = 1000;

struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  // Largest number of nonzero features in any row.
  std::size_t max_active = 0;

  std::span<const double> Row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
};

std::vector<std::string> BuildVocabulary(const LabeledCorpus& corpus) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& e : corpus.examples) {
    for (auto& t : WordTokenSequence(e.text)) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > kVocabularySize) ranked.resize(kVocabularySize);
  std::vector<std::string> vocab;
  vocab.reserve(ranked.size());
  for (auto& [token, _] : ranked) vocab.push_back(token);
  return vocab;
}

// Binary presence of each vocabulary token.
DesignMatrix Featurize(const LabeledCorpus& corpus,
                       const std::vector<std::string>& vocab) {
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < vocab.size(); ++i) column.emplace(vocab[i], i);

  DesignMatrix x;
  x.rows = corpus.examples.size();
  x.cols = std::max<std::size_t>(vocab.size(), 1);
  x.data.assign(x.rows * x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    double* row = x.data.data() + r * x.cols;
    std::size_t active = 0;
    for (const auto& t : WordTokens(corpus.examples[r].text)) {
      auto it = column.find(t);
      if (it == column.end()) continue;
      row[it->second] = 1.0;
      ++active;
    }
    x.max_active = std::max(x.max_active, active);
  }
  return x;
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct LogisticModel {
  std::vector<double> w;
  double bias = 0.0;

  double Predict(std::span<const double> row) const {
    return Sigmoid(kernels::Dot(row, w) + bias);
  }
};

// Full-batch gradient descent on the mean log-loss plus (kL2/2)|w|^2, with
// step 1/L where L = |row|^2/4 + kL2 bounds the Hessian (bias column
// included).
LogisticModel Train(const DesignMatrix& x, const std::vector<double>& y,
                    const std::vector<std::size_t>& train_rows) {
  LogisticModel model;
  model.w.assign(x.cols, 0.0);
  const double lipschitz =
      0.25 * static_cast<double>(x.max_active + 1) + kL2;
  const double step = 1.0 / lipschitz;
  const double inv_n = 1.0 / static_cast<double>(train_rows.size());

  std::vector<double> grad(x.cols);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t r : train_rows) {
      const auto row = x.Row(r);
      const double residual = (model.Predict(row) - y[r]) * inv_n;
      kernels::Axpy(residual, row, grad);
      grad_bias += residual;
    }
    kernels::Axpy(kL2, model.w, grad);

    double max_abs = std::abs(grad_bias);
    for (double g : grad) max_abs = std::max(max_abs, std::abs(g));
    if (max_abs < kGradientTolerance) break;

    kernels::Axpy(-step, grad, model.w);
    model.bias -= step * grad_bias;
  }
  return model;
}

// Stratified assignment: each label is shuffled separately and dealt
// round-robin, so every fold sees both labels when counts allow.
std::vector<int> AssignFolds(const LabeledCorpus& corpus, int folds,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> fold(corpus.examples.size(), 0);
  std::size_t dealt = 0;
  for (Label label : {Label::kMember, Label::kNonmember}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
      if (corpus.examples[i].label == label) idx.push_back(i);
    }
    // Fisher-Yates with an explicit draw so results do not depend on the
    // standard library's shuffle.
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[rng() % i]);
    }
    for (std::size_t i : idx) fold[i] = static_cast<int>(dealt++ % folds);
  }
  return fold;
}

}  // namespace

std::vector<AttackScore> BagOfWordsScores(const LabeledCorpus& corpus,
                                          const AttackConfig& cfg) {
  if (!corpus.HasBothLabels()) {
    throw Error(ErrorCode::kInvalidArgument,
                "Bag-of-Words needs both member and nonmember examples");
  }
  if (cfg.bow_folds < 2) {
    throw Error(ErrorCode::kInvalidArgument, "Bag-of-Words needs folds >= 2");
  }

  const std::vector<std::string> vocab = BuildVocabulary(corpus);
  const DesignMatrix x = Featurize(corpus, vocab);
  std::vector<double> y(corpus.examples.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = corpus.examples[i].label == Label::kMember ? 1.0 : 0.0;
  }
  const std::vector<int> fold = AssignFolds(corpus, cfg.bow_folds, cfg.seed);

  std::vector<double> probability(corpus.examples.size(), 0.5);
  std::vector<std::future<void>> jobs;
  for (int f = 0; f < cfg.bow_folds; ++f) {
    jobs.push_back(std::async(std::launch::async, [&, f] {
      std::vector<std::size_t> train;
      std::vector<std::size_t> held_out;
      for (std::size_t i = 0; i < fold.size(); ++i) {
        (fold[i] == f ? held_out : train).push_back(i);
      }
      if (held_out.empty() || train.empty()) return;
      const LogisticModel model = Train(x, y, train);
      for (std::size_t i : held_out) probability[i] = model.Predict(x.Row(i));
    }));
  }
  for (auto& j : jobs) j.get();

  std::vector<AttackScore> out;
  out.reserve(corpus.examples.size());
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    out.push_back({corpus.examples[i].id, Attack::kBagOfWords,
                   cfg.SignOf(Attack::kBagOfWords) * probability[i]});
  }
  return out;
}

}  // namespace miaudit
