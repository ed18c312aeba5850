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
#ifndef MIAUDIT_UTIL_H_
#define MIAUDIT_UTIL_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace miaudit {

std::string Sha256Hex(std::string_view data);

std::string ReadFile(const std::string& path);

// Writes to "<path>.tmp" and renames over path. Parent directories are
// created as needed.
void WriteFileAtomic(const std::string& path, std::string_view content);

struct JsonLine {
  std::size_t line_number = 0;
  nlohmann::json value;
};

// Parses one JSON value per non-blank line; throws Error{kParse} with the
// line number on malformed input.
std::vector<JsonLine> ParseJsonLines(std::string_view content,
                                     std::string_view source_name);
std::vector<JsonLine> ReadJsonLines(const std::string& path);

// Compact single-line dump plus a trailing newline; used for every JSONL
// artifact.
std::string DumpLine(const nlohmann::json& value);

std::string AsciiLower(std::string_view text);

}  // namespace miaudit

#endif  // MIAUDIT_UTIL_H_
