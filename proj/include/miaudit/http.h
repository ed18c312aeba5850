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
// Minimal JSON-over-HTTP client plumbing shared by the service-backed
// providers (paraphraser, tagger, token scorer, feature service).

#ifndef MIAUDIT_HTTP_H_
#define MIAUDIT_HTTP_H_

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace miaudit {

struct ServiceEndpoint {
  // Full URL of the endpoint, e.g. http://127.0.0.1:8080/v1/chat/completions.
  std::string url;
  // Name of the environment variable holding a bearer token. Empty: no auth.
  std::string api_key_env;
  // Model name forwarded in chat-completion and scoring requests.
  std::string model;
  std::chrono::milliseconds timeout{60000};

  bool configured() const { return !url.empty(); }
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
};

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

// Throws Error{kConfig} for URLs that are not http(s)://host[:port][/path].
ParsedUrl SplitUrl(std::string_view url);

// POSTs body as JSON and parses the JSON response. Connection failures and
// 5xx responses are retried with exponential backoff; the final failure (or
// any 4xx) throws Error{kTransport}.
nlohmann::json PostJson(const ServiceEndpoint& endpoint,
                        const nlohmann::json& body,
                        const RetryPolicy& retry = {});

// GET returning parsed JSON, no retries.
nlohmann::json GetJson(const ServiceEndpoint& endpoint, std::string_view path);

// OpenAI-style chat completion. Returns choices[0].message.content.
std::string ChatComplete(const ServiceEndpoint& endpoint,
                         std::string_view system_prompt,
                         std::string_view user_content,
                         const RetryPolicy& retry = {});

// Total HTTP requests issued by this process (attempts, not logical calls).
std::size_t HttpRequestCount();

}  // namespace miaudit

#endif  // MIAUDIT_HTTP_H_
