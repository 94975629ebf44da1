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

#ifndef THOUGHTNAV_DUELING_NET_H_
#define THOUGHTNAV_DUELING_NET_H_

// Dueling Q-network over the encoded self-evaluation state:
//
//   h1 = relu(W1 x + b1)           7  -> h1
//   h2 = relu(W2 h1 + b2)          h1 -> h2
//   V  = Wv h2 + bv                h2 -> 1
//   A  = Wa h2 + ba                h2 -> 5
//   Q  = V + A - mean(A)
//
// Everything is templated on the scalar type and written against Eigen
// dense types, so batch evaluation is a matrix product per layer.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include <Eigen/Core>
#include <fmt/format.h>

#include "thoughtnav/core_types.h"
#include "thoughtnav/errors.h"

namespace thoughtnav {

struct NetWidths {
  int hidden1 = 48;
  int hidden2 = 40;
  friend bool operator==(const NetWidths&, const NetWidths&) = default;
};

inline constexpr NetWidths kDefaultWidths{48, 40};

constexpr std::int64_t parameter_count(NetWidths w) {
  const std::int64_t h1 = w.hidden1;
  const std::int64_t h2 = w.hidden2;
  return (kNumAspects * h1 + h1) + (h1 * h2 + h2) + (h2 + 1) +
         (kNumActions * h2 + kNumActions);
}

template <typename Scalar>
struct DuelingNet {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix w1;  // h1 x 7
  Vector b1;
  Matrix w2;  // h2 x h1
  Vector b2;
  Matrix wv;  // 1 x h2
  Vector bv;  // size 1
  Matrix wa;  // 5 x h2
  Vector ba;

  static DuelingNet zeros(NetWidths w) {
    if (w.hidden1 < 1 || w.hidden2 < 1) {
      throw InputError(fmt::format("layer widths must be >= 1, got ({}, {})",
                                   w.hidden1, w.hidden2));
    }
    DuelingNet net;
    net.w1 = Matrix::Zero(w.hidden1, kNumAspects);
    net.b1 = Vector::Zero(w.hidden1);
    net.w2 = Matrix::Zero(w.hidden2, w.hidden1);
    net.b2 = Vector::Zero(w.hidden2);
    net.wv = Matrix::Zero(1, w.hidden2);
    net.bv = Vector::Zero(1);
    net.wa = Matrix::Zero(kNumActions, w.hidden2);
    net.ba = Vector::Zero(kNumActions);
    return net;
  }

  NetWidths widths() const {
    return {static_cast<int>(w1.rows()), static_cast<int>(w2.rows())};
  }

  bool same_topology(const DuelingNet& other) const {
    return widths() == other.widths();
  }
};

using Navigator = DuelingNet<double>;

// Calls fn(block_a, block_b, ...) for each of the eight parameter blocks in
// layer order: w1 b1 w2 b2 wv bv wa ba.
template <typename Fn, typename... Nets>
void for_each_block(Fn&& fn, Nets&... nets) {
  fn(nets.w1...);
  fn(nets.b1...);
  fn(nets.w2...);
  fn(nets.b2...);
  fn(nets.wv...);
  fn(nets.bv...);
  fn(nets.wa...);
  fn(nets.ba...);
}

template <typename Scalar>
std::int64_t parameter_count(const DuelingNet<Scalar>& net) {
  std::int64_t n = 0;
  for_each_block([&](const auto& block) { n += block.size(); }, net);
  return n;
}

// Weights uniform in +-sqrt(1/fan_in), biases zero. Deterministic per seed.
template <typename Scalar = double>
DuelingNet<Scalar> init_net(std::uint64_t seed, NetWidths widths = kDefaultWidths) {
  auto net = DuelingNet<Scalar>::zeros(widths);
  std::mt19937_64 rng(seed);
  auto fill = [&rng](auto& w) {
    const double bound = std::sqrt(1.0 / static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = static_cast<Scalar>(dist(rng));
      }
    }
  };
  fill(net.w1);
  fill(net.w2);
  fill(net.wv);
  fill(net.wa);
  return net;
}

// Column-major flattening in block order. Inverse of unflatten.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flatten(const DuelingNet<Scalar>& net) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flat(parameter_count(net));
  Eigen::Index offset = 0;
  for_each_block(
      [&](const auto& block) {
        flat.segment(offset, block.size()) =
            Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(
                block.data(), block.size());
        offset += block.size();
      },
      net);
  return flat;
}

template <typename Scalar, typename Derived>
void unflatten(const Eigen::MatrixBase<Derived>& flat, DuelingNet<Scalar>& net) {
  if (flat.size() != parameter_count(net)) {
    throw InputError(fmt::format("flat parameter size {} != {}", flat.size(),
                                 parameter_count(net)));
  }
  Eigen::Index offset = 0;
  for_each_block(
      [&](auto& block) {
        Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(block.data(),
                                                             block.size()) =
            flat.segment(offset, block.size());
        offset += block.size();
      },
      net);
}

// Intermediate activations of one batch pass; columns are samples.
template <typename Scalar>
struct ForwardTrace {
  using Matrix = typename DuelingNet<Scalar>::Matrix;
  Matrix z1, h1, z2, h2;
  Matrix value;      // 1 x n
  Matrix advantage;  // 5 x n
  Matrix q;          // 5 x n
};

template <typename Scalar, typename Derived>
ForwardTrace<Scalar> forward_trace(const DuelingNet<Scalar>& net,
                                   const Eigen::MatrixBase<Derived>& inputs) {
  if (inputs.rows() != kNumAspects) {
    throw InputError(fmt::format("input has {} rows, expected {}",
                                 inputs.rows(), kNumAspects));
  }
  if (!inputs.allFinite()) throw InputError("non-finite network input");
  ForwardTrace<Scalar> t;
  t.z1 = (net.w1 * inputs).colwise() + net.b1;
  t.h1 = t.z1.cwiseMax(Scalar(0));
  t.z2 = (net.w2 * t.h1).colwise() + net.b2;
  t.h2 = t.z2.cwiseMax(Scalar(0));
  t.value = (net.wv * t.h2).colwise() + net.bv;
  t.advantage = (net.wa * t.h2).colwise() + net.ba;
  const auto mean_adv = t.advantage.colwise().mean();
  t.q = t.advantage.rowwise() - mean_adv;
  t.q.rowwise() += t.value.row(0);
  return t;
}

// Q-values for a batch: 7 x n inputs -> 5 x n outputs.
template <typename Scalar, typename Derived>
typename DuelingNet<Scalar>::Matrix forward_batch(
    const DuelingNet<Scalar>& net, const Eigen::MatrixBase<Derived>& inputs) {
  return forward_trace(net, inputs).q;
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, kNumActions, 1> forward(
    const DuelingNet<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != 1) throw InputError("forward expects a single column");
  return forward_trace(net, x).q.col(0);
}

template <typename Scalar>
Eigen::Matrix<Scalar, kNumActions, 1> forward(const DuelingNet<Scalar>& net,
                                              const StateVector& s) {
  return forward(net, encode_state<Scalar>(s));
}

// Gradient of sum_n q_n . upstream_n with respect to every parameter,
// summed over the batch columns. The result has the net's own layout.
//
// ReLU uses the subgradient 0 at exactly zero.
template <typename Scalar, typename DerivedX, typename DerivedG>
DuelingNet<Scalar> backward_batch(const DuelingNet<Scalar>& net,
                                  const Eigen::MatrixBase<DerivedX>& inputs,
                                  const Eigen::MatrixBase<DerivedG>& upstream) {
  using Matrix = typename DuelingNet<Scalar>::Matrix;
  if (upstream.rows() != kNumActions || upstream.cols() != inputs.cols()) {
    throw InputError(fmt::format(
        "upstream gradient shape {}x{} does not match {}x{}", upstream.rows(),
        upstream.cols(), kNumActions, inputs.cols()));
  }
  const ForwardTrace<Scalar> t = forward_trace(net, inputs);

  // dq_i/dA_j = delta_ij - 1/5 and dq_i/dV = 1.
  const Matrix d_value = upstream.colwise().sum();
  const Matrix d_adv = upstream.rowwise() - upstream.colwise().mean();

  DuelingNet<Scalar> g;
  g.wv = d_value * t.h2.transpose();
  g.bv = d_value.rowwise().sum();
  g.wa = d_adv * t.h2.transpose();
  g.ba = d_adv.rowwise().sum();

  Matrix d_h2 = net.wv.transpose() * d_value + net.wa.transpose() * d_adv;
  const Matrix d_z2 =
      d_h2.cwiseProduct((t.z2.array() > Scalar(0)).template cast<Scalar>().matrix());
  g.w2 = d_z2 * t.h1.transpose();
  g.b2 = d_z2.rowwise().sum();

  const Matrix d_h1 = net.w2.transpose() * d_z2;
  const Matrix d_z1 =
      d_h1.cwiseProduct((t.z1.array() > Scalar(0)).template cast<Scalar>().matrix());
  g.w1 = d_z1 * inputs.transpose();
  g.b1 = d_z1.rowwise().sum();
  return g;
}

template <typename Scalar, typename DerivedX, typename DerivedG>
DuelingNet<Scalar> backward(const DuelingNet<Scalar>& net,
                            const Eigen::MatrixBase<DerivedX>& x,
                            const Eigen::MatrixBase<DerivedG>& upstream) {
  if (x.cols() != 1 || upstream.cols() != 1 || upstream.rows() != kNumActions) {
    throw InputError("backward expects a 7-vector input and a 5-vector gradient");
  }
  return backward_batch(net, x, upstream);
}

// Masked greedy choice; ties go to the lowest index.
template <typename Derived>
ActionKind masked_argmax(const Eigen::MatrixBase<Derived>& q, ActionMask legal) {
  if (legal.empty()) throw InputError("masked_argmax over an empty action set");
  int best = -1;
  for (ActionKind a : kAllActions) {
    if (!legal.contains(a)) continue;
    const int i = action_index(a);
    if (best < 0 || q(i) > q(best)) best = i;
  }
  return action_from_index(best);
}

// Unmasked argmax, ties to the lowest index.
template <typename Derived>
int argmax_index(const Eigen::MatrixBase<Derived>& q) {
  int best = 0;
  for (int i = 1; i < q.size(); ++i) {
    if (q(i) > q(best)) best = i;
  }
  return best;
}

}  // namespace thoughtnav

#endif  // THOUGHTNAV_DUELING_NET_H_
