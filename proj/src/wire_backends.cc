// Copyright 2026 The thoughtnav Authors
// SPDX-License-Identifier: Apache-2.0
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

// HTTP-backed chat and PRM clients.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>

#include <fmt/format.h>

#include "thoughtnav/errors.h"
#include "thoughtnav/gateway.h"
#include "thoughtnav/prm.h"

namespace thoughtnav {
namespace {

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError(fmt::format("endpoint '{}' has no scheme", url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

[[noreturn]] void throw_for_status(int status, const std::string& body) {
  const std::string snippet = body.substr(0, 200);
  if (status == 401 || status == 403) {
    throw AuthError(fmt::format("HTTP {}: {}", status, snippet));
  }
  if (status == 408 || status == 409 || status == 425 || status == 429 ||
      status >= 500) {
    throw TransientError(fmt::format("HTTP {}: {}", status, snippet));
  }
  throw RequestRejectedError(fmt::format("HTTP {}: {}", status, snippet));
}

httplib::Result post_json(const std::string& scheme_host_port,
                          const std::string& path, const std::string& body,
                          const std::string& bearer,
                          std::chrono::seconds timeout) {
  httplib::Client client(scheme_host_port);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
  return client.Post(path, headers, body, "application/json");
}

}  // namespace

OpenAiChatBackend::OpenAiChatBackend(BackendConfig cfg)
    : cfg_(std::move(cfg)), in_flight_(std::max(1, cfg_.max_in_flight)) {
  const char* key = std::getenv(cfg_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError(fmt::format("API key variable {} is not set", cfg_.api_key_env));
  }
  api_key_ = key;
  const SplitUrl u = split_url(cfg_.base_url);
  scheme_host_port_ = u.scheme_host_port;
  path_ = u.path + "/chat/completions";
}

nlohmann::json OpenAiChatBackend::request_body(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  if (request.system) {
    messages.push_back({{"role", "system"}, {"content", *request.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user}});
  return {{"model", request.model},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens}};
}

std::pair<std::string, TokenUsage> OpenAiChatBackend::parse_response(
    std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedResponseError(fmt::format("response is not JSON: {}", e.what()));
  }
  try {
    const auto& message = j.at("choices").at(0).at("message");
    std::string content =
        message.at("content").is_null() ? "" : message.at("content").get<std::string>();
    TokenUsage usage;
    if (j.contains("usage") && j["usage"].is_object()) {
      usage.input = j["usage"].value("prompt_tokens", std::int64_t{0});
      usage.output = j["usage"].value("completion_tokens", std::int64_t{0});
    }
    if (usage.input < 0 || usage.output < 0) {
      throw MalformedResponseError("negative token usage");
    }
    return {std::move(content), usage};
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponseError(fmt::format("unexpected response shape: {}", e.what()));
  }
}

ChatExchange OpenAiChatBackend::complete(const ChatRequest& request) {
  ChatRequest req = request;
  if (req.model.empty()) req.model = cfg_.model;
  const std::string body = request_body(req).dump();

  in_flight_.acquire();
  const auto start = std::chrono::steady_clock::now();
  httplib::Result res = post_json(scheme_host_port_, path_, body, api_key_, cfg_.timeout);
  const auto stop = std::chrono::steady_clock::now();
  in_flight_.release();

  if (!res) {
    throw TransientError(fmt::format("request to {}{} failed: {}", scheme_host_port_,
                                     path_, httplib::to_string(res.error())));
  }
  if (res->status != 200) throw_for_status(res->status, res->body);

  ChatExchange ex;
  ex.request = std::move(req);
  std::tie(ex.response, ex.usage) = parse_response(res->body);
  ex.latency = std::chrono::duration_cast<std::chrono::milliseconds>(stop - start);
  return ex;
}

HttpPrm::HttpPrm(PrmConfig cfg, Sleeper sleep)
    : cfg_(std::move(cfg)), sleep_(std::move(sleep)) {
  if (!cfg_.api_key_env.empty()) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError(fmt::format("PRM key variable {} is not set", cfg_.api_key_env));
    }
    api_key_ = key;
  }
  const SplitUrl u = split_url(cfg_.url);
  scheme_host_port_ = u.scheme_host_port;
  path_ = u.path.empty() ? "/" : u.path;
}

nlohmann::json HttpPrm::request_body(std::string_view problem,
                                     std::span<const std::string> steps) {
  return {{"problem", std::string(problem)},
          {"steps", std::vector<std::string>(steps.begin(), steps.end())}};
}

double HttpPrm::parse_response(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& s = j.at("score");
    if (!s.is_number()) throw MalformedResponseError("PRM score is not numeric");
    return s.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponseError(fmt::format("bad PRM response: {}", e.what()));
  }
}

double HttpPrm::raw_score(std::string_view problem,
                          std::span<const std::string> steps) {
  const std::string body = request_body(problem, steps).dump();
  int attempts = 0;
  return with_retries(
      cfg_.retry, sleep_,
      [&] {
        httplib::Result res =
            post_json(scheme_host_port_, path_, body, api_key_, cfg_.timeout);
        if (!res) {
          throw TransientError(fmt::format("PRM request failed: {}",
                                           httplib::to_string(res.error())));
        }
        if (res->status != 200) throw_for_status(res->status, res->body);
        return parse_response(res->body);
      },
      attempts);
}

}  // namespace thoughtnav
