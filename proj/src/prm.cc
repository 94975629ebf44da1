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

#include "thoughtnav/prm.h"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {

double score_process(ProcessRewardModel& prm, std::string_view problem,
                     std::span<const std::string> steps) {
  if (problem.empty()) throw InputError("score_process: empty problem");
  const double raw = prm.raw_score(problem, steps);
  if (std::isnan(raw)) throw MalformedResponseError("PRM returned NaN");
  if (raw < 0.0 || raw > 1.0) {
    spdlog::warn("PRM score {} outside [0,1], clamping", raw);
    return std::clamp(raw, 0.0, 1.0);
  }
  return raw;
}

ScriptedPrm::ScriptedPrm(std::vector<PrmRule> rules, double fallback,
                         double empty_reasoning)
    : rules_(std::move(rules)), fallback_(fallback), empty_(empty_reasoning) {}

std::unique_ptr<ScriptedPrm> ScriptedPrm::from_json(const nlohmann::json& j) {
  try {
    std::vector<PrmRule> rules;
    for (const auto& r : j.value("rules", nlohmann::json::array())) {
      PrmRule rule;
      const auto& c = r.at("contains");
      rule.contains = c.is_string() ? std::vector<std::string>{c.get<std::string>()}
                                    : c.get<std::vector<std::string>>();
      rule.score = r.at("score").get<double>();
      rules.push_back(std::move(rule));
    }
    return std::make_unique<ScriptedPrm>(std::move(rules), j.value("default", 0.5),
                                         j.value("empty", 0.5));
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(fmt::format("bad PRM script: {}", e.what()));
  }
}

std::unique_ptr<ScriptedPrm> ScriptedPrm::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DecodeError(fmt::format("cannot read {}", path));
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(fmt::format("{}: {}", path, e.what()));
  }
}

double ScriptedPrm::raw_score(std::string_view problem,
                              std::span<const std::string> steps) {
  {
    std::lock_guard lock(mu_);
    calls_ += 1;
  }
  if (steps.empty()) return empty_;
  std::string joined(problem);
  for (const std::string& s : steps) {
    joined += '\n';
    joined += s;
  }
  for (const PrmRule& r : rules_) {
    bool all = true;
    for (const std::string& needle : r.contains) {
      if (joined.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) return r.score;
  }
  return fallback_;
}

std::size_t ScriptedPrm::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace thoughtnav
