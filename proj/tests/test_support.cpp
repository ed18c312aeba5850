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
#include "test_support.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <sys/wait.h>

#include "miaudit/error.h"

namespace miaudit_test {

namespace fs = std::filesystem;

namespace {

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TempDir::TempDir() {
  std::random_device rd;
  for (int i = 0; i < 100; ++i) {
    fs::path candidate = fs::temp_directory_path() /
                         ("miaudit-test-" + std::to_string(rd()) + "-" +
                          std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string Quote(const std::string& arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

CommandResult RunCommand(const std::string& command_line) {
  TempDir scratch;
  const std::string out = scratch.Sub("out");
  const std::string err = scratch.Sub("err");
  const std::string full =
      command_line + " >" + Quote(out) + " 2>" + Quote(err);
  const int status = std::system(full.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = Slurp(out);
  r.err = Slurp(err);
  return r;
}

MockServer::~MockServer() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

void MockServer::Start() {
  port_ = server_.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("mock server failed to bind");
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
}

std::string MockServer::Url(const std::string& path) const {
  return "http://127.0.0.1:" + std::to_string(port_) + path;
}

std::map<std::string, std::string> Snapshot(const fs::path& dir,
                                            const std::string& skip_component) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (!skip_component.empty() &&
        rel.find(skip_component) != std::string::npos) {
      continue;
    }
    files[rel] = Slurp(entry.path());
  }
  return files;
}

std::vector<miaudit::SparseFeatureVector> MapFeatureProvider::Fetch(
    std::span<const std::string> texts) {
  std::vector<miaudit::SparseFeatureVector> out;
  for (const auto& t : texts) {
    auto it = map_.find(t);
    if (it == map_.end()) {
      throw miaudit::Error(miaudit::ErrorCode::kProvider, "no features for: " + t);
    }
    out.push_back(it->second);
  }
  return out;
}

miaudit::SparseFeatureVector Axis() {
  return miaudit::SparseFeatureVector(2, {0}, {1.0});
}

miaudit::SparseFeatureVector AtCosine(double c) {
  if (c >= 1.0) return Axis();
  if (c <= 0.0) return miaudit::SparseFeatureVector(2, {1}, {1.0});
  // (c, s) with c^2 + s^2 = 1 up to rounding.
  return miaudit::SparseFeatureVector(2, {0, 1}, {c, std::sqrt(1.0 - c * c)});
}

std::map<miaudit::Attack, std::vector<miaudit::ScoredExample>> ScoreFixture(
    const miaudit::fixtures::ScoredCorpus& fixture,
    const miaudit::AttackConfig& cfg) {
  using miaudit::Attack;
  std::map<Attack, std::vector<miaudit::ScoredExample>> out;
  auto bundles = miaudit::BundleRecords(fixture.records);
  for (const auto& b : bundles) {
    const miaudit::LabeledExample* ex = fixture.corpus.Find(b.id);
    for (Attack a : miaudit::kAllAttacks) {
      if (a == Attack::kBagOfWords) continue;
      auto s = miaudit::ScoreAttack(a, b, ex->text, cfg);
      out[a].push_back({s.id, a, s.score, ex->label});
    }
  }
  for (const auto& s : miaudit::BagOfWordsScores(fixture.corpus, cfg)) {
    out[Attack::kBagOfWords].push_back(
        {s.id, Attack::kBagOfWords, s.score, fixture.corpus.Find(s.id)->label});
  }
  return out;
}

std::string BugReportMarkup() {
  return "<section type=\"structure\">Description</section>\n"
         "<section type=\"narrative\">Using pdfbox, I generated a PDF/A-2b "
         "file and the embedded font fails validation.</section>\n"
         "<section type=\"structure\">Specification: ISO 19005-2:2011, "
         "Clause: 6.2.11.4, Test number: 4</section>\n"
         "<section type=\"narrative\">Some CIDs listed in the CIDToGidMap "
         "are missing from the CIDSet.</section>\n";
}

}  // namespace miaudit_test
