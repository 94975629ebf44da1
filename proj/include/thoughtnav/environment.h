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

#ifndef THOUGHTNAV_ENVIRONMENT_H_
#define THOUGHTNAV_ENVIRONMENT_H_

#include <functional>
#include <memory>
#include <random>

#include "thoughtnav/core_types.h"

namespace thoughtnav {

using Rng = std::mt19937_64;

struct EnvStep {
  StateVector next_state;
  double reward = 0.0;
  bool done = false;
};

// Episodic environment seen by the trainer and by policy rollouts.
class Environment {
 public:
  virtual ~Environment() = default;

  // Starts a new episode. Any randomness (question choice, initial state)
  // draws from rng so the caller controls reproducibility.
  virtual StateVector reset(Rng& rng) = 0;
  virtual ActionMask legal_actions() const = 0;
  virtual EnvStep step(ActionKind action) = 0;
  virtual int max_actions() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

// Legal-action rule shared by the reasoning and synthetic environments:
// Terminate only once an answer is present or the budget is one action from
// exhausted; otherwise the enabled blocks, minus Refine before any action.
ActionMask masked_actions(bool answer_present, int actions_taken,
                          int max_actions, ActionMask enabled);

}  // namespace thoughtnav

#endif  // THOUGHTNAV_ENVIRONMENT_H_
