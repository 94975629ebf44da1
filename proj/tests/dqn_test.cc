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

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.h"
#include "thoughtnav/dqn.h"
#include "thoughtnav/environment.h"
#include "thoughtnav/errors.h"
#include "thoughtnav/synthetic_env.h"

namespace thoughtnav {
namespace {

// A net whose output is q for every input.
Navigator constant_q_net(const std::array<double, 5>& q) {
  Navigator n = Navigator::zeros({2, 2});
  double mean = 0;
  for (int k = 0; k < 5; ++k) {
    n.ba(k) = q[k];
    mean += q[k] / 5;
  }
  n.bv(0) = mean;
  return n;
}

StateVector random_state(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 3);
  std::array<int, 7> s{};
  for (int& v : s) v = d(rng);
  return StateVector(s);
}

Transition random_transition(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {random_state(rng), action_from_index(static_cast<int>(rng() % 5)), u(rng),
          random_state(rng), u(rng) < 0.3};
}

TEST(ReplayBuffer, EvictsOldestBeyondCapacity) {
  ReplayBuffer b(500);
  for (int i = 0; i < 501; ++i) {
    Transition t;
    t.reward = i;
    b.push(t);
  }
  EXPECT_EQ(b.size(), 500u);
  EXPECT_EQ(b.items().front().reward, 1.0);
  EXPECT_EQ(b.items().back().reward, 500.0);
}

TEST(ReplayBuffer, SampleWithoutReplacement) {
  ReplayBuffer b(10);
  for (int i = 0; i < 10; ++i) {
    Transition t;
    t.reward = i;
    b.push(t);
  }
  Rng rng(1);
  const auto all = b.sample(10, rng);
  std::multiset<double> seen;
  for (const auto& t : all) seen.insert(t.reward);
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(std::set<double>(seen.begin(), seen.end()).size(), 10u);
  EXPECT_TRUE(b.sample(0, rng).empty());
  EXPECT_THROW(ReplayBuffer(4).sample(1, rng), InputError);

  Rng r1(7), r2(7);
  const auto s1 = b.sample(4, r1);
  const auto s2 = b.sample(4, r2);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(s1[i].reward, s2[i].reward);
}

TEST(ReplayBuffer, NeverExceedsCapacityUnderRandomOps) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cap = 1 + rng() % 20;
    ReplayBuffer b(cap);
    Rng srng(trial);
    for (int op = 0; op < 200; ++op) {
      if (rng() % 3 == 0 && b.size() > 0) {
        const auto got = b.sample(1 + rng() % b.size(), srng);
        EXPECT_LE(got.size(), b.size());
      } else {
        b.push(random_transition(rng));
      }
      ASSERT_LE(b.size(), cap);
    }
  }
}

TEST(Schedules, MatchTableValues) {
  const TrainerConfig cfg;
  EXPECT_EQ(epsilon_at(cfg, 0), 1.0);
  EXPECT_EQ(epsilon_at(cfg, 1), 0.9995);
  EXPECT_NEAR(epsilon_at(cfg, 10000), 0.006738, 1e-5);
  EXPECT_EQ(lr_at(cfg, 0), 0.01);
  EXPECT_EQ(lr_at(cfg, 999), 0.01);
  EXPECT_EQ(lr_at(cfg, 1000), 0.005);
  EXPECT_EQ(lr_at(cfg, 2999), 0.0025);
}

TEST(TrainerConfig, DefaultsAndValidation) {
  TrainerConfig cfg;
  EXPECT_EQ(cfg.gamma, 0.9);
  EXPECT_EQ(cfg.episodes, 3000);
  EXPECT_EQ(cfg.batch_size, 64);
  EXPECT_EQ(cfg.target_sync_interval, 50);
  EXPECT_EQ(cfg.buffer_capacity, 500);
  EXPECT_EQ(cfg.epsilon_decay, 0.9995);
  cfg.gamma = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.epsilon_decay = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(TdTargets, HandExample) {
  const Navigator online = constant_q_net({0.1, 0.9, 0.2, 0.0, 0.3});
  const Navigator target = constant_q_net({0.4, 0.2, 0.6, 0.1, 0.0});
  const std::vector<Transition> batch = {
      {StateVector{}, ActionKind::kDebate, 0.5, StateVector{}, false},
      {StateVector{}, ActionKind::kDebate, 0.7, StateVector{}, true}};
  const Eigen::VectorXd y = td_targets(batch, online, target, 0.9);
  EXPECT_NEAR(y(0), 0.68, 1e-15);
  EXPECT_EQ(y(1), 0.7);
}

TEST(TdTargets, MatchScalarOracleOnRandomBatches) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Navigator online = oracle::random_net(rng, {6, 5});
    const Navigator target = oracle::random_net(rng, {6, 5});
    std::vector<Transition> batch;
    for (int i = 0; i < 8; ++i) batch.push_back(random_transition(rng));
    const Eigen::VectorXd y = td_targets(batch, online, target, 0.9);
    const Eigen::VectorXd y0 = td_targets(batch, online, online, 0.0);
    for (int i = 0; i < 8; ++i) {
      EXPECT_NEAR(y(i), oracle::td_target(batch[i], online, target, 0.9), 1e-12);
      EXPECT_EQ(y0(i), batch[i].reward);
    }
  }
}

TEST(TdTargets, RejectsTopologyMismatch) {
  std::vector<Transition> batch(1);
  EXPECT_THROW(td_targets(batch, init_net<double>(0, {3, 3}), init_net<double>(0, {3, 4}), 0.9),
               InputError);
}

TEST(TrainStep, FixedPointLeavesParametersUnchanged) {
  const Navigator fixed = constant_q_net({0.2, 0.3, 0.4, 0.5, 0.6});
  Navigator online = fixed;
  auto adam = make_adam(online);
  // y = r for done transitions; choose r equal to the current Q(s,a).
  const std::vector<Transition> batch = {
      {StateVector{}, ActionKind::kDecompose, 0.3, StateVector{}, true}};
  const double residual = forward(online, StateVector{})(1) - 0.3;
  ASSERT_NEAR(residual, 0.0, 1e-15);
  const double loss = train_step(online, fixed, adam, batch, 0.9, 0.01);
  EXPECT_NEAR(loss, 0.0, 1e-30);
  EXPECT_TRUE(flatten(online).isApprox(flatten(fixed), 1e-12));
}

TEST(TrainStep, SingleTransitionLossAndMonotoneDescent) {
  std::mt19937_64 rng(5);
  const Navigator start = oracle::random_net(rng, {8, 6});
  const std::vector<Transition> batch = {
      {random_state(rng), ActionKind::kRefine, 0.8, random_state(rng), true}};
  const double q = forward(start, batch[0].state)(3);

  // Adam moves every weight by about lr per step, so a small rate is needed
  // for strictly monotone descent on a frozen single-sample target.
  Navigator online = start;
  auto adam = make_adam(online);
  const double first = train_step(online, start, adam, batch, 0.9, 3e-4);
  EXPECT_NEAR(first, (q - 0.8) * (q - 0.8), 1e-14);
  double prev = first;
  for (int i = 0; i < 200; ++i) {
    const double l = train_step(online, start, adam, batch, 0.9, 3e-4);
    ASSERT_LE(l, prev) << "step " << i;
    prev = l;
  }
  EXPECT_LT(prev, 0.5 * first);

  // At the default-scale rate the loss still converges, with some ringing.
  online = start;
  adam = make_adam(online);
  for (int i = 0; i < 200; ++i) prev = train_step(online, start, adam, batch, 0.9, 1e-3);
  EXPECT_LT(prev, 1e-4);
}

TEST(SyncTarget, CopiesAndIsolates) {
  std::mt19937_64 rng(6);
  const Navigator online0 = oracle::random_net(rng, {4, 4});
  Navigator online = online0;
  Navigator target = init_net<double>(0, {4, 4});
  sync_target(online, target);
  const StateVector s = random_state(rng);
  EXPECT_EQ(forward(online, s), forward(target, s));
  online.ba.array() += 1.0;
  online.w1.array() *= 2.0;
  EXPECT_EQ(forward(target, s), forward(online0, s));
}

TEST(SelectAction, ExplorationStaysInsideTheMask) {
  std::mt19937_64 rng(7);
  const Navigator net = oracle::random_net(rng, {4, 4});
  Rng r(8);
  const ActionMask legal{ActionKind::kDecompose, ActionKind::kTerminate};
  std::set<ActionKind> seen;
  for (int i = 0; i < 500; ++i) {
    const ActionKind a = select_action(net, random_state(rng), legal, 1.0, r);
    ASSERT_TRUE(legal.contains(a));
    seen.insert(a);
  }
  EXPECT_EQ(seen.size(), 2u);
  const StateVector s = random_state(rng);
  EXPECT_EQ(select_action(net, s, legal, 0.0, r), masked_argmax(forward(net, s), legal));
}

TEST(RunTraining, ZeroEpisodesReturnsInitialNet) {
  auto mdp = std::make_shared<const ScriptedMdp>(make_scripted(0));
  TrainerConfig cfg;
  cfg.episodes = 0;
  cfg.seed = 3;
  const TrainingResult r = run_training(synthetic_factory(mdp), cfg);
  EXPECT_TRUE(r.stats.empty());
  EXPECT_EQ(flatten(r.online), flatten(init_net<double>(3)));
}

TEST(RunTraining, DeterministicAndStatsConsistent) {
  auto mdp = std::make_shared<const ScriptedMdp>(make_scripted(1));
  TrainerConfig cfg;
  cfg.episodes = 120;
  cfg.seed = 9;
  const TrainingResult a = run_training(synthetic_factory(mdp), cfg);
  const TrainingResult b = run_training(synthetic_factory(mdp), cfg);
  ASSERT_EQ(a.stats.size(), 120u);
  EXPECT_EQ(flatten(a.online), flatten(b.online));
  std::ostringstream ca, cb;
  write_reward_curve(ca, a.stats);
  write_reward_curve(cb, b.stats);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_GT(a.gradient_updates, 0);
  for (const EpisodeStats& s : a.stats) {
    EXPECT_LE(s.steps, mdp->horizon);
    double g = 0, d = 1, total = 0;
    for (double r : s.rewards) {
      g += d * r;
      d *= cfg.gamma;
      total += r;
    }
    EXPECT_NEAR(s.discounted_return, g, 1e-12);
    EXPECT_NEAR(s.total_return, total, 1e-12);
  }
}

// An environment that throws on its second step.
class FlakyEnv : public Environment {
 public:
  StateVector reset(Rng&) override {
    steps_ = 0;
    return StateVector{};
  }
  ActionMask legal_actions() const override { return masked_actions(false, steps_, 5, ActionMask::all()); }
  EnvStep step(ActionKind) override {
    if (++steps_ == 2) throw StepFailure("scripted failure");
    return {StateVector{}, 0.5, steps_ >= 5};
  }
  int max_actions() const override { return 5; }

 private:
  int steps_ = 0;
};

TEST(RunTraining, EnvironmentErrorsAbortOnlyTheEpisode) {
  TrainerConfig cfg;
  cfg.episodes = 5;
  const TrainingResult r = run_training([] { return std::make_unique<FlakyEnv>(); }, cfg);
  ASSERT_EQ(r.stats.size(), 5u);
  for (const EpisodeStats& s : r.stats) {
    EXPECT_TRUE(s.failed);
    EXPECT_EQ(s.steps, 2);
    EXPECT_EQ(s.rewards.back(), 0.0);
  }
}

TEST(RewardCurve, HeaderAndRows) {
  EpisodeStats s;
  s.episode = 3;
  s.total_return = 1.5;
  s.steps = 2;
  std::ostringstream out;
  write_reward_curve(out, std::vector<EpisodeStats>{s});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "episode\treturn\tdiscounted_return\tsteps\tloss\tepsilon\tlr");
  EXPECT_NE(out.str().find("\n3\t1.5\t"), std::string::npos);
}

}  // namespace
}  // namespace thoughtnav
