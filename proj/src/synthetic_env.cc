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

#include "thoughtnav/synthetic_env.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {

ActionMask ScriptedMdp::legal(int state, int step) const {
  return masked_actions(answer_present[state], step, horizon, enabled);
}

void ScriptedMdp::validate() const {
  const auto n = states.size();
  if (n < 1) throw InputError("MDP has no states");
  if (next.size() != n || reward.size() != n || planted.size() != n ||
      answer_present.size() != n || initial.size() != n) {
    throw InputError("MDP tables are not total over the state set");
  }
  if (horizon < 1) throw InputError("MDP horizon must be >= 1");
  double mass = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      if (next[s][a] < 0 || next[s][a] >= static_cast<int>(n)) {
        throw InputError(fmt::format("next[{}][{}] out of range", s, a));
      }
      if (!(reward[s][a] >= 0.0 && reward[s][a] <= 1.0)) {
        throw InputError(fmt::format("reward[{}][{}] outside [0,1]", s, a));
      }
    }
    if (initial[s] < 0.0) throw InputError("negative initial probability");
    mass += initial[s];
  }
  if (std::abs(mass - 1.0) > 1e-9) throw InputError("initial distribution does not sum to 1");
}

ScriptedMdp make_scripted(std::uint64_t seed, const SyntheticSpec& spec) {
  if (spec.n_states < 2) throw InputError("synthetic MDP needs n_states >= 2");
  if (spec.n_states > 4096) throw InputError("synthetic MDP n_states too large");
  if (!(spec.sharpness >= 0.5 && spec.sharpness <= 1.0)) {
    throw InputError("sharpness must lie in [0.5, 1]");
  }
  if (spec.horizon < 1) throw InputError("horizon must be >= 1");
  if (!(spec.answer_fraction >= 0.0 && spec.answer_fraction <= 1.0)) {
    throw InputError("answer_fraction must lie in [0, 1]");
  }

  Rng rng(seed);
  ScriptedMdp mdp;
  mdp.horizon = spec.horizon;
  const auto n = static_cast<std::size_t>(spec.n_states);

  std::set<StateVector> seen;
  std::uniform_int_distribution<int> score(0, 3);
  while (mdp.states.size() < n) {
    std::array<int, kNumAspects> s{};
    for (int& v : s) v = score(rng);
    StateVector sv(s);
    if (seen.insert(sv).second) mdp.states.push_back(sv);
  }

  // Planted actions are drawn from the non-terminating blocks so the optimal
  // policy reasons for the full horizon.
  std::uniform_int_distribution<int> block(0, kNumActions - 2);
  std::uniform_real_distribution<double> high(spec.sharpness, 1.0);
  std::uniform_real_distribution<double> low(0.0, 1.0 - spec.sharpness);
  mdp.reward.resize(n);
  mdp.planted.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    mdp.planted[s] = action_from_index(block(rng));
    for (int a = 0; a < kNumActions; ++a) {
      const bool is_planted = a == action_index(mdp.planted[s]);
      // Degenerate uniform ranges yield their endpoint exactly.
      double r = is_planted ? (spec.sharpness == 1.0 ? 1.0 : high(rng))
                            : (spec.sharpness == 1.0 ? 0.0 : low(rng));
      mdp.reward[s][a] = r;
    }
  }

  mdp.next.resize(n);
  for (int a = 0; a < kNumActions; ++a) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t s = 0; s < n; ++s) {
      mdp.next[s][a] = a == action_index(ActionKind::kTerminate)
                           ? static_cast<int>(s)
                           : perm[s];
    }
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  mdp.answer_present.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    mdp.answer_present[s] = spec.answer_fraction > 0.0 && unit(rng) < spec.answer_fraction;
  }
  mdp.initial.assign(n, 1.0 / static_cast<double>(n));
  return mdp;
}

OracleSolution optimal_return(const ScriptedMdp& mdp, double gamma) {
  mdp.validate();
  const int n = mdp.size();
  const int h = mdp.horizon;
  OracleSolution sol;
  sol.value.assign(h + 1, std::vector<double>(n, 0.0));
  sol.best_action.assign(h, std::vector<ActionKind>(n, ActionKind::kTerminate));
  for (int t = h - 1; t >= 0; --t) {
    for (int s = 0; s < n; ++s) {
      double best = -1.0;
      for (ActionKind a : mdp.legal(s, t).members()) {
        const int ai = action_index(a);
        double v = mdp.reward[s][ai];
        if (a != ActionKind::kTerminate) v += gamma * sol.value[t + 1][mdp.next[s][ai]];
        if (v > best) {
          best = v;
          sol.best_action[t][s] = a;
        }
      }
      sol.value[t][s] = best;
    }
  }
  sol.value.pop_back();
  for (int s = 0; s < n; ++s) sol.optimal_return += mdp.initial[s] * sol.value[0][s];
  return sol;
}

double greedy_return(const ScriptedMdp& mdp, const Navigator& net, double gamma) {
  mdp.validate();
  const int n = mdp.size();
  Eigen::MatrixXd x(kNumAspects, n);
  for (int s = 0; s < n; ++s) x.col(s) = encode_state(mdp.states[s]);
  const Eigen::MatrixXd q = forward_batch(net, x);

  // The policy is deterministic, so the value recursion has no max.
  std::vector<double> value(n, 0.0);
  for (int t = mdp.horizon - 1; t >= 0; --t) {
    std::vector<double> current(n, 0.0);
    for (int s = 0; s < n; ++s) {
      const ActionKind a = masked_argmax(q.col(s), mdp.legal(s, t));
      const int ai = action_index(a);
      current[s] = mdp.reward[s][ai];
      if (a != ActionKind::kTerminate) current[s] += gamma * value[mdp.next[s][ai]];
    }
    value = std::move(current);
  }
  double total = 0.0;
  for (int s = 0; s < n; ++s) total += mdp.initial[s] * value[s];
  return total;
}

SyntheticEnv::SyntheticEnv(std::shared_ptr<const ScriptedMdp> mdp)
    : mdp_(std::move(mdp)) {
  mdp_->validate();
}

StateVector SyntheticEnv::reset(Rng& rng) {
  std::discrete_distribution<int> pick(mdp_->initial.begin(), mdp_->initial.end());
  state_ = pick(rng);
  steps_ = 0;
  done_ = false;
  return mdp_->states[state_];
}

ActionMask SyntheticEnv::legal_actions() const {
  if (done_) return {};
  return mdp_->legal(state_, steps_);
}

EnvStep SyntheticEnv::step(ActionKind action) {
  if (done_) throw InputError("step on a finished episode");
  if (!legal_actions().contains(action)) {
    throw InputError(fmt::format("illegal action {} at step {}", action_name(action), steps_));
  }
  const int ai = action_index(action);
  EnvStep out;
  out.reward = mdp_->reward[state_][ai];
  state_ = mdp_->next[state_][ai];
  steps_ += 1;
  out.done = action == ActionKind::kTerminate;
  out.next_state = mdp_->states[state_];
  done_ = out.done;
  return out;
}

EnvFactory synthetic_factory(std::shared_ptr<const ScriptedMdp> mdp) {
  return [mdp = std::move(mdp)] { return std::make_unique<SyntheticEnv>(mdp); };
}

void to_json(nlohmann::json& j, const ScriptedMdp& mdp) {
  j = nlohmann::json::object();
  j["horizon"] = mdp.horizon;
  j["enabled"] = mdp.enabled.bits();
  auto& states = j["states"] = nlohmann::json::array();
  for (int s = 0; s < mdp.size(); ++s) {
    states.push_back({{"scores", mdp.states[s].to_array()},
                      {"next", mdp.next[s]},
                      {"reward", mdp.reward[s]},
                      {"planted", std::string(action_name(mdp.planted[s]))},
                      {"answer_present", static_cast<bool>(mdp.answer_present[s])},
                      {"initial", mdp.initial[s]}});
  }
}

void from_json(const nlohmann::json& j, ScriptedMdp& mdp) {
  mdp = ScriptedMdp{};
  mdp.horizon = j.at("horizon").get<int>();
  ActionMask enabled;
  const auto bits = j.value("enabled", ActionMask::all().bits());
  for (ActionKind a : kAllActions) {
    if (bits & (1u << action_index(a))) enabled.insert(a);
  }
  mdp.enabled = enabled;
  for (const auto& s : j.at("states")) {
    mdp.states.emplace_back(s.at("scores").get<std::array<int, kNumAspects>>());
    mdp.next.push_back(s.at("next").get<std::array<int, kNumActions>>());
    mdp.reward.push_back(s.at("reward").get<std::array<double, kNumActions>>());
    mdp.planted.push_back(action_from_name(s.at("planted").get<std::string>()));
    mdp.answer_present.push_back(s.value("answer_present", false));
    mdp.initial.push_back(s.at("initial").get<double>());
  }
  mdp.validate();
}

}  // namespace thoughtnav
