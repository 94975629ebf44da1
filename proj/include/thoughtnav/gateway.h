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

#ifndef THOUGHTNAV_GATEWAY_H_
#define THOUGHTNAV_GATEWAY_H_

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace thoughtnav {

struct TokenUsage {
  std::int64_t input = 0;
  std::int64_t output = 0;

  TokenUsage& operator+=(const TokenUsage& o) {
    input += o.input;
    output += o.output;
    return *this;
  }
  friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct ChatRequest {
  std::string user;
  std::optional<std::string> system;
  std::string model;
  double temperature = 1.0;
  int max_tokens = 1024;
};

struct ChatExchange {
  ChatRequest request;
  std::string response;
  TokenUsage usage;
  std::chrono::milliseconds latency{0};
  int attempts = 1;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatExchange complete(const ChatRequest& request) = 0;
};

TokenUsage usage_totals(std::span<const ChatExchange> calls);

// Thread-safe running total of token usage.
class UsageMeter {
 public:
  void record(const TokenUsage& u);
  TokenUsage totals() const;
  std::int64_t calls() const;

 private:
  mutable std::mutex mu_;
  TokenUsage total_;
  std::int64_t calls_ = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};
  double backoff_multiplier = 2.0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

// Runs fn, retrying TransientError with exponential backoff. Any other error
// propagates immediately. Throws RetryBudgetExhausted once max_attempts
// transient failures have been seen. attempts receives the number of tries.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, const Sleeper& sleep, Fn&& fn,
                  int& attempts) -> decltype(fn());

struct BackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  double temperature = 1.0;
  int max_tokens = 1024;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
  std::string api_key_env = "OPENAI_API_KEY";
  int max_in_flight = 4;
};

// Decorator adding the retry contract to any backend.
class RetryingChatBackend : public ChatBackend {
 public:
  RetryingChatBackend(std::shared_ptr<ChatBackend> inner, RetryPolicy policy,
                      Sleeper sleep = real_sleeper());
  ChatExchange complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ChatBackend> inner_;
  RetryPolicy policy_;
  Sleeper sleep_;
};

// OpenAI-compatible chat-completions client. The prompt is sent as a single
// user message. Reads the API key from the environment variable named in the
// config at construction; a missing key is a ConfigError.
class OpenAiChatBackend : public ChatBackend {
 public:
  explicit OpenAiChatBackend(BackendConfig cfg);
  ChatExchange complete(const ChatRequest& request) override;

  // Builds the request body; exposed for tests.
  static nlohmann::json request_body(const ChatRequest& request);
  // Extracts content and usage from a response body. Throws
  // MalformedResponseError.
  static std::pair<std::string, TokenUsage> parse_response(std::string_view body);

 private:
  BackendConfig cfg_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<1024> in_flight_;
};

// Deterministic rule-driven backend for offline runs.
//
// A rule matches when the prompt contains every string in `contains` and,
// if set, matches `pattern` (ECMAScript regex, searched). The n-th time a
// rule fires it returns responses[n % size] when `cycle` is set, otherwise
// responses[min(n, size-1)]. Queued sequence responses take precedence over
// rules.
struct ScriptRule {
  std::string name;
  std::vector<std::string> contains;
  std::optional<std::string> pattern;
  std::vector<std::string> responses;
  bool cycle = true;
};

class ScriptedChatBackend : public ChatBackend {
 public:
  ScriptedChatBackend(std::vector<ScriptRule> rules, bool strict,
                      std::optional<std::string> fallback = std::nullopt);

  // Fixture schema:
  //   {"strict": bool, "default": str?, "sequence": [str]?,
  //    "rules": [{"name": str?, "contains": str|[str], "pattern": str?,
  //               "response": str | "responses": [str], "cycle": bool?}]}
  static std::unique_ptr<ScriptedChatBackend> from_json(const nlohmann::json& j);
  static std::unique_ptr<ScriptedChatBackend> from_file(const std::string& path);

  void push_sequence(std::string response);
  ChatExchange complete(const ChatRequest& request) override;

  std::vector<ChatExchange> calls() const;
  std::size_t call_count() const;
  // Forget call history and rule counters.
  void reset();

 private:
  struct CompiledRule {
    ScriptRule rule;
    std::optional<std::regex> regex;
    std::size_t fired = 0;
  };
  bool matches(const CompiledRule& r, const std::string& prompt) const;

  mutable std::mutex mu_;
  std::vector<CompiledRule> rules_;
  bool strict_;
  std::optional<std::string> fallback_;
  std::deque<std::string> sequence_;
  std::vector<ChatExchange> calls_;
};

// Rough token estimate used by scripted backends: ceil(bytes / 4).
std::int64_t approx_tokens(std::string_view text);

}  // namespace thoughtnav

#include "thoughtnav/internal/retry_impl.h"

#endif  // THOUGHTNAV_GATEWAY_H_
