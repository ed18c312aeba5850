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
// Regenerates the bundled offline fixture set.
//
//   make-fixtures <dir> [--documents N] [--seed S]

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "miaudit/error.h"
#include "miaudit/fixtures.h"

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic offline fixture set"};
  std::string dir;
  std::size_t documents = 20;
  std::uint64_t seed = 0;
  app.add_option("dir", dir, "Output directory")->required();
  app.add_option("--documents", documents, "Corpus size");
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);
  try {
    for (const auto& path : miaudit::fixtures::WritePipelineFixture(dir, documents, seed)) {
      std::cout << path << "\n";
    }
  } catch (const miaudit::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
