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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "miaudit/error.h"
#include "miaudit/util.h"

namespace miaudit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kNoEvaluablePairs: return "no_evaluable_pairs";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kNoViableCandidate: return "no_viable_candidate";
    case ErrorCode::kUnavailable: return "unavailable";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kProvider: return "provider";
  }
  return "unknown";
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFileAtomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::kIo, "rename " + tmp + ": " + ec.message());
}

std::vector<JsonLine> ParseJsonLines(std::string_view content,
                                     std::string_view source_name) {
  std::vector<JsonLine> lines;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      lines.push_back({line_number, nlohmann::json::parse(line)});
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParse, std::string(source_name) + ":" +
                                         std::to_string(line_number) +
                                         ": unparseable line: " + e.what());
    }
  }
  return lines;
}

std::vector<JsonLine> ReadJsonLines(const std::string& path) {
  return ParseJsonLines(ReadFile(path), path);
}

std::string DumpLine(const nlohmann::json& value) {
  return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) +
         "\n";
}

}  // namespace miaudit
