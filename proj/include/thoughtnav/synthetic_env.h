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

#ifndef THOUGHTNAV_SYNTHETIC_ENV_H_
#define THOUGHTNAV_SYNTHETIC_ENV_H_

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "thoughtnav/core_types.h"
#include "thoughtnav/dueling_net.h"
#include "thoughtnav/environment.h"

namespace thoughtnav {

struct SyntheticSpec {
  int n_states = 8;
  // Planted rewards lie in [sharpness, 1], all others in [0, 1 - sharpness].
  double sharpness = 0.7;
  int horizon = 5;
  // Fraction of states flagged as already carrying an answer.
  double answer_fraction = 0.0;
};

// Deterministic finite MDP with the reasoning environment's shape: 7-aspect
// states, five actions, rewards in [0,1], Terminate absorbing, identical
// masking rules.
struct ScriptedMdp {
  std::vector<StateVector> states;
  std::vector<std::array<int, kNumActions>> next;       // next[s][a]
  std::vector<std::array<double, kNumActions>> reward;  // reward[s][a]
  std::vector<ActionKind> planted;
  std::vector<bool> answer_present;
  std::vector<double> initial;  // distribution over states
  int horizon = 5;
  ActionMask enabled = ActionMask::all();

  int size() const { return static_cast<int>(states.size()); }
  ActionMask legal(int state, int step) const;
  // Throws InputError on inconsistent tables.
  void validate() const;
};

// Throws InputError for n_states < 2, sharpness outside [0.5, 1], or a
// horizon below 1.
ScriptedMdp make_scripted(std::uint64_t seed, const SyntheticSpec& spec = {});

struct OracleSolution {
  // best_action[step][state] and value[step][state], steps 0..horizon-1.
  std::vector<std::vector<ActionKind>> best_action;
  std::vector<std::vector<double>> value;
  double optimal_return = 0.0;
};

// Exact finite-horizon backward induction.
OracleSolution optimal_return(const ScriptedMdp& mdp, double gamma);

// Exact expected discounted return of the net's greedy masked policy.
double greedy_return(const ScriptedMdp& mdp, const Navigator& net, double gamma);

class SyntheticEnv : public Environment {
 public:
  explicit SyntheticEnv(std::shared_ptr<const ScriptedMdp> mdp);

  StateVector reset(Rng& rng) override;
  ActionMask legal_actions() const override;
  EnvStep step(ActionKind action) override;
  int max_actions() const override { return mdp_->horizon; }

  int current_state() const { return state_; }

 private:
  std::shared_ptr<const ScriptedMdp> mdp_;
  int state_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

EnvFactory synthetic_factory(std::shared_ptr<const ScriptedMdp> mdp);

void to_json(nlohmann::json& j, const ScriptedMdp& mdp);
void from_json(const nlohmann::json& j, ScriptedMdp& mdp);

}  // namespace thoughtnav

#endif  // THOUGHTNAV_SYNTHETIC_ENV_H_
