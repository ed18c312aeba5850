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
#include "miaudit/http.h"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <string>
#include <string_view>
#include <thread>

#include "httplib.h"
#include "miaudit/error.h"

namespace miaudit {

namespace {

std::atomic<std::size_t> g_request_count{0};

httplib::Headers AuthHeaders(const ServiceEndpoint& endpoint) {
  httplib::Headers headers;
  if (!endpoint.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  return headers;
}

httplib::Client MakeClient(const ServiceEndpoint& endpoint,
                           const ParsedUrl& url) {
  httplib::Client client(url.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
      endpoint.timeout);
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  client.set_write_timeout(secs);
  return client;
}

nlohmann::json ParseBody(const std::string& body, const std::string& url) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kTransport,
                "non-JSON response from " + url + ": " + e.what());
  }
}

}  // namespace

ParsedUrl SplitUrl(std::string_view url) {
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorCode::kConfig, "URL without scheme: " + std::string(url));
  }
  std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kConfig, "unsupported URL scheme: " + std::string(url));
  }
  std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == scheme_end + 3) {
    throw Error(ErrorCode::kConfig, "URL without host: " + std::string(url));
  }
  ParsedUrl out;
  out.scheme_host_port = std::string(url.substr(0, path_start));
  out.path = path_start == std::string_view::npos
                 ? "/"
                 : std::string(url.substr(path_start));
  return out;
}

nlohmann::json PostJson(const ServiceEndpoint& endpoint,
                        const nlohmann::json& body, const RetryPolicy& retry) {
  const ParsedUrl url = SplitUrl(endpoint.url);
  httplib::Client client = MakeClient(endpoint, url);
  const std::string payload = body.dump();
  const httplib::Headers headers = AuthHeaders(endpoint);

  auto backoff = retry.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
    ++g_request_count;
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (res && res->status >= 200 && res->status < 300) {
      return ParseBody(res->body, endpoint.url);
    }
    if (res && res->status >= 400 && res->status < 500) {
      throw Error(ErrorCode::kTransport,
                  endpoint.url + " returned HTTP " + std::to_string(res->status) +
                      ": " + res->body);
    }
    last_error = res ? "HTTP " + std::to_string(res->status)
                     : httplib::to_string(res.error());
    if (attempt < retry.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(backoff.count() * retry.multiplier));
    }
  }
  throw Error(ErrorCode::kTransport,
              endpoint.url + " failed after " +
                  std::to_string(retry.max_attempts) + " attempts: " + last_error);
}

nlohmann::json GetJson(const ServiceEndpoint& endpoint, std::string_view path) {
  const ParsedUrl url = SplitUrl(endpoint.url);
  httplib::Client client = MakeClient(endpoint, url);
  ++g_request_count;
  auto res = client.Get(std::string(path), AuthHeaders(endpoint));
  if (!res || res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::kTransport, "GET " + std::string(path) + " on " +
                                           url.scheme_host_port + " failed");
  }
  return ParseBody(res->body, endpoint.url);
}

std::string ChatComplete(const ServiceEndpoint& endpoint,
                         std::string_view system_prompt,
                         std::string_view user_content,
                         const RetryPolicy& retry) {
  nlohmann::json body = {
      {"messages",
       {{{"role", "system"}, {"content", system_prompt}},
        {{"role", "user"}, {"content", user_content}}}},
      {"temperature", 0.0},
  };
  if (!endpoint.model.empty()) body["model"] = endpoint.model;
  nlohmann::json response = PostJson(endpoint, body, retry);
  try {
    return response.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kTransport,
                "malformed chat completion from " + endpoint.url + ": " +
                    e.what());
  }
}

std::size_t HttpRequestCount() { return g_request_count.load(); }

}  // namespace miaudit
