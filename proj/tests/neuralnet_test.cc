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

#include <gtest/gtest.h>

#include "oracles.h"
#include "thoughtnav/adam.h"
#include "thoughtnav/checkpoint.h"
#include "thoughtnav/dueling_net.h"
#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

std::array<double, 7> random_input(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, 7> x{};
  for (double& v : x) v = u(rng);
  return x;
}

Eigen::VectorXd as_vector(const std::array<double, 7>& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), 7);
}

TEST(ParameterCount, MatchesFormulaAndBlockSizes) {
  EXPECT_EQ(parameter_count(NetWidths{1, 1}), 22);
  EXPECT_EQ(parameter_count(NetWidths{48, 40}), 384 + 1960 + 41 + 205);
  for (NetWidths w : {NetWidths{1, 1}, NetWidths{4, 4}, NetWidths{48, 40}, NetWidths{64, 32}}) {
    const Navigator n = Navigator::zeros(w);
    std::int64_t blocks = 0;
    for_each_block([&](const auto& b) { blocks += b.rows() * b.cols(); }, n);
    EXPECT_EQ(parameter_count(w), blocks);
    EXPECT_EQ(parameter_count(n), blocks);
  }
  // Within 10% of the reported 2,566.
  EXPECT_LT(std::abs(parameter_count(kDefaultWidths) - 2566), 257);
}

TEST(InitNet, DeterministicPerSeedAndBoundedByFanIn) {
  const Navigator a = init_net<double>(5);
  const Navigator b = init_net<double>(5);
  const Navigator c = init_net<double>(6);
  EXPECT_EQ(flatten(a), flatten(b));
  EXPECT_NE(flatten(a), flatten(c));
  EXPECT_TRUE(a.b1.isZero() && a.b2.isZero() && a.bv.isZero() && a.ba.isZero());
  EXPECT_LE(a.w1.cwiseAbs().maxCoeff(), std::sqrt(1.0 / 7));
  EXPECT_LE(a.w2.cwiseAbs().maxCoeff(), std::sqrt(1.0 / 48));
  EXPECT_THROW(init_net<double>(1, {0, 4}), InputError);
  EXPECT_THROW(init_net<double>(1, {4, 0}), InputError);
}

TEST(Forward, MatchesLoopOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Navigator n = oracle::random_net(rng, {6, 5});
    const auto x = random_input(rng);
    const auto q = forward(n, as_vector(x));
    const auto ref = oracle::q_values(n, x);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(q(k), ref[k], 1e-12);
  }
}

TEST(Forward, BatchColumnsEqualSingleCalls) {
  std::mt19937_64 rng(12);
  const Navigator n = oracle::random_net(rng, {8, 8});
  Eigen::MatrixXd X(7, 6);
  for (int c = 0; c < 6; ++c) X.col(c) = as_vector(random_input(rng));
  const Eigen::MatrixXd Q = forward_batch(n, X);
  for (int c = 0; c < 6; ++c) {
    EXPECT_TRUE(Q.col(c).isApprox(forward(n, Eigen::VectorXd(X.col(c))), 1e-14));
  }
}

TEST(Forward, RejectsBadInput) {
  const Navigator n = init_net<double>(0, {3, 3});
  Eigen::VectorXd x = Eigen::VectorXd::Zero(7);
  x(2) = std::nan("");
  EXPECT_THROW(forward(n, x), InputError);
  EXPECT_THROW(forward(n, Eigen::VectorXd::Zero(6)), InputError);
}

TEST(Dueling, IdentityAndAdvantageShiftInvariance) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    Navigator n = oracle::random_net(rng, {5, 4});
    const Eigen::VectorXd x = as_vector(random_input(rng));
    const auto t = forward_trace(n, x);
    const double mean = t.advantage.col(0).mean();
    for (int k = 0; k < 5; ++k) {
      EXPECT_NEAR(t.q(k, 0), t.value(0, 0) + t.advantage(k, 0) - mean, 1e-14);
    }
    const int before = argmax_index(t.q.col(0));
    n.ba.array() += 3.7;
    EXPECT_EQ(argmax_index(forward(n, x)), before);
  }
}

TEST(Backward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 20) {
    const Navigator n = oracle::random_net(rng, {5, 4});
    const auto x = random_input(rng);
    if (oracle::min_abs_preactivation(n, x) < 1e-3) continue;
    std::array<double, 5> g{};
    for (double& v : g) v = u(rng);
    const Navigator grad = backward(n, as_vector(x), Eigen::Map<const Eigen::VectorXd>(g.data(), 5));
    const Eigen::VectorXd a = flatten(grad);
    const Eigen::VectorXd fd = oracle::fd_gradient(n, x, g);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      EXPECT_LE(std::abs(a(i) - fd(i)), std::max(1e-8, 1e-4 * std::max(std::abs(a(i)), std::abs(fd(i)))))
          << "parameter " << i;
    }
    ++checked;
  }
}

TEST(Backward, BatchIsSumOfSingles) {
  std::mt19937_64 rng(15);
  const Navigator n = oracle::random_net(rng, {6, 3});
  Eigen::MatrixXd X(7, 4), G = Eigen::MatrixXd::Random(5, 4);
  for (int c = 0; c < 4; ++c) X.col(c) = as_vector(random_input(rng));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(parameter_count(n));
  for (int c = 0; c < 4; ++c) {
    sum += flatten(backward(n, Eigen::VectorXd(X.col(c)), Eigen::VectorXd(G.col(c))));
  }
  EXPECT_TRUE(flatten(backward_batch(n, X, G)).isApprox(sum, 1e-12));
}

TEST(MaskedArgmax, RespectsMaskAndBreaksTiesLow) {
  Eigen::Matrix<double, 5, 1> q;
  q << 1, 5, 5, 2, 0;
  EXPECT_EQ(masked_argmax(q, ActionMask::all()), ActionKind::kDecompose);
  EXPECT_EQ(masked_argmax(q, {ActionKind::kRefine, ActionKind::kTerminate}), ActionKind::kRefine);
  EXPECT_EQ(masked_argmax(q, {ActionKind::kTerminate}), ActionKind::kTerminate);
  EXPECT_THROW(masked_argmax(q, ActionMask{}), InputError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Eigen::VectorXd theta(3);
  theta << 1.0, -2.0, 0.5;
  const Eigen::VectorXd g = (Eigen::VectorXd(3) << 0.3, -4.0, 1e-3).finished();
  auto state = AdamState<double>::for_size(3);
  adam_step(theta, g, state, 0.01);
  // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
  for (int i = 0; i < 3; ++i) {
    const double start = i == 0 ? 1.0 : (i == 1 ? -2.0 : 0.5);
    EXPECT_NEAR(theta(i) - start, -0.01 * g(i) / (std::abs(g(i)) + 1e-8), 1e-15);
  }
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, DescendsAQuadratic) {
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.0);
  auto state = AdamState<double>::for_size(1);
  for (int t = 0; t < 500; ++t) {
    const Eigen::VectorXd g = 2.0 * theta;
    adam_step(theta, g, state, 0.01);
  }
  EXPECT_LT(std::abs(theta(0)), 0.05);
}

TEST(Adam, RejectsBadArguments) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(2);
  auto state = AdamState<double>::for_size(2);
  EXPECT_THROW(adam_step(theta, Eigen::VectorXd::Zero(3), state, 0.01), InputError);
  EXPECT_THROW(adam_step(theta, Eigen::VectorXd::Zero(2), state, 0.0), InputError);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(2);
  bad(1) = INFINITY;
  EXPECT_THROW(adam_step(theta, bad, state, 0.01), InputError);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(16);
  const Navigator n = oracle::random_net(rng, {48, 40});
  const std::string bytes = save_checkpoint(n, {99, 1500});
  const Checkpoint c = load_checkpoint(bytes);
  EXPECT_EQ(c.meta.seed, 99u);
  EXPECT_EQ(c.meta.episodes, 1500u);
  EXPECT_EQ(flatten(c.net), flatten(n));
  const Eigen::VectorXd x = as_vector(random_input(rng));
  EXPECT_EQ(forward(c.net, x), forward(n, x));
}

TEST(Checkpoint, DetectsCorruption) {
  const std::string bytes = save_checkpoint(init_net<double>(1, {3, 2}), {});
  EXPECT_THROW(load_checkpoint(bytes.substr(0, bytes.size() - 3)), DecodeError);
  EXPECT_THROW(load_checkpoint(bytes + "x"), DecodeError);
  std::string flipped = bytes;
  flipped[40] ^= 0x10;
  EXPECT_THROW(load_checkpoint(flipped), DecodeError);
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(load_checkpoint(magic), DecodeError);
  std::string version = bytes;
  version[8] = 9;
  EXPECT_THROW(load_checkpoint(version), VersionError);
}

}  // namespace
}  // namespace thoughtnav
