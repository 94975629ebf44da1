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

#include "thoughtnav/dqn.h"

#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

Eigen::MatrixXd stack_states(std::span<const Transition> batch, bool next) {
  Eigen::MatrixXd x(kNumAspects, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) =
        encode_state(next ? batch[i].next_state : batch[i].state);
  }
  return x;
}

}  // namespace

void TrainerConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0,1)");
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (target_sync_interval < 1) throw ConfigError("target_sync_interval must be >= 1");
  if (!(base_lr > 0.0)) throw ConfigError("base_lr must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr_decay must be in (0,1]");
  if (lr_decay_every < 1) throw ConfigError("lr_decay_every must be >= 1");
  if (buffer_capacity < batch_size) {
    throw ConfigError("buffer_capacity must be >= batch_size");
  }
  if (!(epsilon_decay > 0.0 && epsilon_decay < 1.0)) {
    throw ConfigError("epsilon_decay must be in (0,1)");
  }
  if (epsilon_min < 0.0 || epsilon_start > 1.0 || epsilon_min > epsilon_start) {
    throw ConfigError("epsilon bounds must satisfy 0 <= min <= start <= 1");
  }
  if (widths.hidden1 < 1 || widths.hidden2 < 1) throw ConfigError("widths must be >= 1");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InputError("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(const Transition& t) {
  items_.push_back(t);
  while (items_.size() > capacity_) items_.pop_front();
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (n > items_.size()) {
    throw InputError(fmt::format("cannot sample {} from a buffer of {}", n,
                                 items_.size()));
  }
  std::vector<std::size_t> idx(items_.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first n slots end up a uniform n-subset.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(items_[idx[i]]);
  return out;
}

double epsilon_at(const TrainerConfig& cfg, std::int64_t global_step) {
  if (global_step < 0) throw InputError("global_step must be >= 0");
  return std::max(cfg.epsilon_min,
                  cfg.epsilon_start *
                      std::pow(cfg.epsilon_decay, static_cast<double>(global_step)));
}

double lr_at(const TrainerConfig& cfg, std::int64_t episode) {
  if (episode < 0) throw InputError("episode must be >= 0");
  return cfg.base_lr *
         std::pow(cfg.lr_decay, static_cast<double>(episode / cfg.lr_decay_every));
}

Eigen::VectorXd td_targets(std::span<const Transition> batch,
                           const Navigator& online, const Navigator& target,
                           double gamma) {
  if (!online.same_topology(target)) {
    throw InputError("td_targets: online and target topologies differ");
  }
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::VectorXd y(n);
  if (n == 0) return y;
  const Eigen::MatrixXd next = stack_states(batch, /*next=*/true);
  const Eigen::MatrixXd q_online = forward_batch(online, next);
  const Eigen::MatrixXd q_target = forward_batch(target, next);
  if (!q_online.allFinite() || !q_target.allFinite()) {
    throw InputError("td_targets: non-finite Q values");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = batch[static_cast<std::size_t>(i)];
    if (t.done) {
      y(i) = t.reward;
    } else {
      const int best = argmax_index(q_online.col(i));
      y(i) = t.reward + gamma * q_target(best, i);
    }
  }
  return y;
}

double train_step(Navigator& online, const Navigator& target,
                  AdamState<double>& adam, std::span<const Transition> batch,
                  double gamma, double lr) {
  if (batch.empty()) throw InputError("train_step: empty batch");
  const Eigen::VectorXd y = td_targets(batch, online, target, gamma);
  const Eigen::MatrixXd states = stack_states(batch, /*next=*/false);
  const Eigen::MatrixXd q = forward_batch(online, states);
  const auto n = static_cast<Eigen::Index>(batch.size());

  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(kNumActions, n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = action_index(batch[static_cast<std::size_t>(i)].action);
    const double residual = q(a, i) - y(i);
    loss += residual * residual;
    upstream(a, i) = 2.0 * residual / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);

  const Navigator grads = backward_batch(online, states, upstream);
  adam_step(online, grads, adam, lr);
  return loss;
}

void sync_target(const Navigator& online, Navigator& target) { target = online; }

ActionKind select_action(const Navigator& net, const StateVector& s,
                         ActionMask legal, double epsilon, Rng& rng) {
  if (legal.empty()) throw InputError("select_action: no legal actions");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    const auto members = legal.members();
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    return members[pick(rng)];
  }
  return masked_argmax(forward(net, s), legal);
}

double discounted_sum(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

TrainingResult run_training(const EnvFactory& make_env, const TrainerConfig& cfg,
                            const EpisodeCallback& on_episode) {
  cfg.validate();
  TrainingResult result;
  result.meta.seed = cfg.seed;
  result.online = init_net<double>(cfg.seed, cfg.widths);
  Navigator target = result.online;
  AdamState<double> adam = make_adam(result.online, cfg.base_lr, cfg.adam);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  for (int episode = 0; episode < cfg.episodes; ++episode) {
    EpisodeStats stats;
    stats.episode = episode;
    stats.lr = lr_at(cfg, episode);
    double loss_sum = 0.0;
    int loss_count = 0;

    std::unique_ptr<Environment> env = make_env();
    StateVector state;
    bool running = true;
    try {
      state = env->reset(rng);
    } catch (const Error& e) {
      if (is_fatal(e)) throw;
      stats.failed = true;
      stats.failure = e.what();
      running = false;
    }

    while (running) {
      const ActionMask legal = env->legal_actions();
      const double eps = epsilon_at(cfg, result.global_steps);
      const ActionKind action = select_action(result.online, state, legal, eps, rng);
      Transition tr{state, action, 0.0, state, true};
      try {
        const EnvStep out = env->step(action);
        tr.reward = out.reward;
        tr.next_state = out.next_state;
        tr.done = out.done;
      } catch (const Error& e) {
        if (is_fatal(e)) throw;
        // The step is recorded as a terminal zero-reward transition.
        stats.failed = true;
        stats.failure = e.what();
        spdlog::warn("episode {} aborted: {}", episode, e.what());
      }
      buffer.push(tr);
      stats.rewards.push_back(tr.reward);
      stats.steps += 1;
      result.global_steps += 1;

      if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
        loss_sum += train_step(result.online, target, adam, batch, cfg.gamma, stats.lr);
        loss_count += 1;
        result.gradient_updates += 1;
        if (result.gradient_updates % cfg.target_sync_interval == 0) {
          sync_target(result.online, target);
        }
      }
      state = tr.next_state;
      running = !tr.done;
    }

    stats.total_return = std::accumulate(stats.rewards.begin(), stats.rewards.end(), 0.0);
    stats.discounted_return = discounted_sum(stats.rewards, cfg.gamma);
    stats.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    stats.epsilon = epsilon_at(cfg, result.global_steps);
    result.meta.episodes = static_cast<std::uint64_t>(episode + 1);
    if (on_episode) on_episode(stats, result.online);
    result.stats.push_back(std::move(stats));
  }
  return result;
}

void write_reward_curve(std::ostream& out, std::span<const EpisodeStats> stats) {
  out << "episode\treturn\tdiscounted_return\tsteps\tloss\tepsilon\tlr\n";
  for (const EpisodeStats& s : stats) {
    out << fmt::format("{}\t{:.17g}\t{:.17g}\t{}\t{:.17g}\t{:.17g}\t{:.17g}\n",
                       s.episode, s.total_return, s.discounted_return, s.steps,
                       s.mean_loss, s.epsilon, s.lr);
  }
}

void write_reward_curve(const std::filesystem::path& path,
                        std::span<const EpisodeStats> stats) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  write_reward_curve(out, stats);
}

}  // namespace thoughtnav
