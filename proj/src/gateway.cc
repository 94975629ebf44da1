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

#include "thoughtnav/gateway.h"

#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {

TokenUsage usage_totals(std::span<const ChatExchange> calls) {
  TokenUsage total;
  for (const ChatExchange& c : calls) total += c.usage;
  return total;
}

void UsageMeter::record(const TokenUsage& u) {
  std::lock_guard lock(mu_);
  total_ += u;
  calls_ += 1;
}

TokenUsage UsageMeter::totals() const {
  std::lock_guard lock(mu_);
  return total_;
}

std::int64_t UsageMeter::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::int64_t approx_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

RetryingChatBackend::RetryingChatBackend(std::shared_ptr<ChatBackend> inner,
                                         RetryPolicy policy, Sleeper sleep)
    : inner_(std::move(inner)), policy_(policy), sleep_(std::move(sleep)) {
  if (!inner_) throw InputError("RetryingChatBackend needs an inner backend");
}

ChatExchange RetryingChatBackend::complete(const ChatRequest& request) {
  int attempts = 0;
  ChatExchange ex = with_retries(
      policy_, sleep_, [&] { return inner_->complete(request); }, attempts);
  ex.attempts = attempts;
  return ex;
}

// --- scripted -------------------------------------------------------------

ScriptedChatBackend::ScriptedChatBackend(std::vector<ScriptRule> rules,
                                         bool strict,
                                         std::optional<std::string> fallback)
    : strict_(strict), fallback_(std::move(fallback)) {
  for (ScriptRule& r : rules) {
    if (r.responses.empty()) {
      throw InputError(fmt::format("script rule '{}' has no responses", r.name));
    }
    CompiledRule c{std::move(r), std::nullopt, 0};
    if (c.rule.pattern) {
      try {
        c.regex.emplace(*c.rule.pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw InputError(fmt::format("script rule '{}': bad pattern: {}",
                                     c.rule.name, e.what()));
      }
    }
    rules_.push_back(std::move(c));
  }
}

namespace {

std::vector<std::string> string_or_list(const nlohmann::json& j) {
  if (j.is_string()) return {j.get<std::string>()};
  if (j.is_array()) return j.get<std::vector<std::string>>();
  throw DecodeError("expected a string or a list of strings");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DecodeError(fmt::format("cannot read {}", path));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace

std::unique_ptr<ScriptedChatBackend> ScriptedChatBackend::from_json(
    const nlohmann::json& j) {
  try {
    std::vector<ScriptRule> rules;
    for (const auto& r : j.value("rules", nlohmann::json::array())) {
      ScriptRule rule;
      rule.name = r.value("name", fmt::format("rule{}", rules.size()));
      if (r.contains("contains")) rule.contains = string_or_list(r.at("contains"));
      if (r.contains("pattern")) rule.pattern = r.at("pattern").get<std::string>();
      if (r.contains("responses")) {
        rule.responses = r.at("responses").get<std::vector<std::string>>();
      } else {
        rule.responses = {r.at("response").get<std::string>()};
      }
      rule.cycle = r.value("cycle", true);
      rules.push_back(std::move(rule));
    }
    std::optional<std::string> fallback;
    if (j.contains("default")) fallback = j.at("default").get<std::string>();
    auto backend = std::make_unique<ScriptedChatBackend>(
        std::move(rules), j.value("strict", false), std::move(fallback));
    for (const auto& s : j.value("sequence", nlohmann::json::array())) {
      backend->push_sequence(s.get<std::string>());
    }
    return backend;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(fmt::format("bad chat script: {}", e.what()));
  }
}

std::unique_ptr<ScriptedChatBackend> ScriptedChatBackend::from_file(
    const std::string& path) {
  return from_json(read_json_file(path));
}

void ScriptedChatBackend::push_sequence(std::string response) {
  std::lock_guard lock(mu_);
  sequence_.push_back(std::move(response));
}

bool ScriptedChatBackend::matches(const CompiledRule& r,
                                  const std::string& prompt) const {
  for (const std::string& needle : r.rule.contains) {
    if (prompt.find(needle) == std::string::npos) return false;
  }
  if (r.regex && !std::regex_search(prompt, *r.regex)) return false;
  return true;
}

ChatExchange ScriptedChatBackend::complete(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  ChatExchange ex;
  ex.request = request;
  const std::string prompt =
      request.system ? *request.system + "\n" + request.user : request.user;

  if (!sequence_.empty()) {
    ex.response = std::move(sequence_.front());
    sequence_.pop_front();
  } else {
    CompiledRule* hit = nullptr;
    int hits = 0;
    for (CompiledRule& r : rules_) {
      if (matches(r, prompt)) {
        if (!hit) hit = &r;
        ++hits;
        if (!strict_) break;
      }
    }
    if (strict_ && hits != 1) {
      throw UnmatchedPromptError(fmt::format(
          "strict script: {} rules matched prompt starting '{}'", hits,
          prompt.substr(0, 80)));
    }
    if (hit) {
      const auto& responses = hit->rule.responses;
      const std::size_t i = hit->rule.cycle
                                ? hit->fired % responses.size()
                                : std::min(hit->fired, responses.size() - 1);
      ex.response = responses[i];
      hit->fired += 1;
    } else if (fallback_) {
      ex.response = *fallback_;
    } else {
      throw UnmatchedPromptError(fmt::format(
          "no script rule matched prompt starting '{}'", prompt.substr(0, 80)));
    }
  }
  ex.usage = {approx_tokens(prompt), approx_tokens(ex.response)};
  calls_.push_back(ex);
  return ex;
}

std::vector<ChatExchange> ScriptedChatBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t ScriptedChatBackend::call_count() const {
  std::lock_guard lock(mu_);
  return calls_.size();
}

void ScriptedChatBackend::reset() {
  std::lock_guard lock(mu_);
  calls_.clear();
  for (CompiledRule& r : rules_) r.fired = 0;
}

}  // namespace thoughtnav
