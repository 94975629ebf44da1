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

#ifndef THOUGHTNAV_PRM_H_
#define THOUGHTNAV_PRM_H_

#include <chrono>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "thoughtnav/gateway.h"

namespace thoughtnav {

// Process reward model: scores a partial solution (problem + steps so far).
class ProcessRewardModel {
 public:
  virtual ~ProcessRewardModel() = default;
  // Unclamped backend value. Use score_process() for the contract.
  virtual double raw_score(std::string_view problem,
                           std::span<const std::string> steps) = 0;
};

// Validates the problem, queries the backend and clamps into [0,1]
// (logging a warning when clamping was needed). NaN is a MalformedResponse.
double score_process(ProcessRewardModel& prm, std::string_view problem,
                     std::span<const std::string> steps);

// Table-driven scores: the first rule whose every `contains` string appears in
// the joined reasoning wins; with no steps the empty-reasoning score applies.
struct PrmRule {
  std::vector<std::string> contains;
  double score = 0.5;
};

class ScriptedPrm : public ProcessRewardModel {
 public:
  explicit ScriptedPrm(std::vector<PrmRule> rules = {}, double fallback = 0.5,
                       double empty_reasoning = 0.5);

  // {"default": x?, "empty": x?, "rules": [{"contains": str|[str], "score": x}]}
  static std::unique_ptr<ScriptedPrm> from_json(const nlohmann::json& j);
  static std::unique_ptr<ScriptedPrm> from_file(const std::string& path);

  double raw_score(std::string_view problem,
                   std::span<const std::string> steps) override;
  std::size_t call_count() const;

 private:
  std::vector<PrmRule> rules_;
  double fallback_;
  double empty_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

struct PrmConfig {
  std::string url = "http://127.0.0.1:8081/score";
  std::chrono::seconds timeout{60};
  RetryPolicy retry;
  // Optional bearer token variable; empty means no auth header.
  std::string api_key_env;
};

// Thin wire contract:
//   POST <url>  {"problem": str, "steps": [str, ...]}
//   200         {"score": number}
class HttpPrm : public ProcessRewardModel {
 public:
  explicit HttpPrm(PrmConfig cfg, Sleeper sleep = real_sleeper());
  double raw_score(std::string_view problem,
                   std::span<const std::string> steps) override;

  static nlohmann::json request_body(std::string_view problem,
                                     std::span<const std::string> steps);
  static double parse_response(std::string_view body);

 private:
  PrmConfig cfg_;
  Sleeper sleep_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace thoughtnav

#endif  // THOUGHTNAV_PRM_H_
