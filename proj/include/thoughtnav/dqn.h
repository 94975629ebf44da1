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

#ifndef THOUGHTNAV_DQN_H_
#define THOUGHTNAV_DQN_H_

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "thoughtnav/adam.h"
#include "thoughtnav/checkpoint.h"
#include "thoughtnav/core_types.h"
#include "thoughtnav/dueling_net.h"
#include "thoughtnav/environment.h"

namespace thoughtnav {

struct TrainerConfig {
  double gamma = 0.9;
  int episodes = 3000;
  int batch_size = 64;
  int target_sync_interval = 50;  // gradient updates
  double base_lr = 0.01;
  double lr_decay = 0.5;
  int lr_decay_every = 1000;  // episodes
  int buffer_capacity = 500;
  double epsilon_start = 1.0;
  double epsilon_min = 0.0;
  double epsilon_decay = 0.9995;  // per environment step
  NetWidths widths = kDefaultWidths;
  AdamConfig adam;
  std::uint64_t seed = 0;

  // Throws ConfigError when a value is outside its domain.
  void validate() const;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 500);

  void push(const Transition& t);
  // Uniform sample without replacement. Throws InputError if n > size().
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Transition>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

double epsilon_at(const TrainerConfig& cfg, std::int64_t global_step);
double lr_at(const TrainerConfig& cfg, std::int64_t episode);

// y = r for terminal transitions, otherwise
// y = r + gamma * Q_target(s', argmax_a Q_online(s', a)).
Eigen::VectorXd td_targets(std::span<const Transition> batch,
                           const Navigator& online, const Navigator& target,
                           double gamma);

// One Adam update of online on the mean squared TD error; returns the loss
// measured before the update.
double train_step(Navigator& online, const Navigator& target,
                  AdamState<double>& adam, std::span<const Transition> batch,
                  double gamma, double lr);

void sync_target(const Navigator& online, Navigator& target);

// epsilon-greedy over the legal set: exploration is uniform over legal
// actions, exploitation is the masked argmax.
ActionKind select_action(const Navigator& net, const StateVector& s,
                         ActionMask legal, double epsilon, Rng& rng);

struct EpisodeStats {
  std::int64_t episode = 0;
  double total_return = 0.0;
  double discounted_return = 0.0;
  int steps = 0;
  double mean_loss = 0.0;
  double epsilon = 0.0;
  double lr = 0.0;
  bool failed = false;
  std::string failure;
  std::vector<double> rewards;
};

double discounted_sum(std::span<const double> rewards, double gamma);

struct TrainingResult {
  Navigator online;
  CheckpointMeta meta;
  std::vector<EpisodeStats> stats;
  std::int64_t global_steps = 0;
  std::int64_t gradient_updates = 0;
};

using EpisodeCallback =
    std::function<void(const EpisodeStats&, const Navigator& online)>;

TrainingResult run_training(const EnvFactory& make_env, const TrainerConfig& cfg,
                            const EpisodeCallback& on_episode = {});

// Tab-separated, one header line then one row per episode:
// episode return discounted_return steps loss epsilon lr
void write_reward_curve(std::ostream& out, std::span<const EpisodeStats> stats);
void write_reward_curve(const std::filesystem::path& path,
                        std::span<const EpisodeStats> stats);

}  // namespace thoughtnav

#endif  // THOUGHTNAV_DQN_H_
