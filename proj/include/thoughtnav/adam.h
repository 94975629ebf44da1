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

#ifndef THOUGHTNAV_ADAM_H_
#define THOUGHTNAV_ADAM_H_

#include <cstdint>

#include <Eigen/Core>

#include "thoughtnav/dueling_net.h"
#include "thoughtnav/errors.h"

namespace thoughtnav {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moments are kept flat, in the order produced by flatten().
template <typename Scalar>
struct AdamState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector first_moment;
  Vector second_moment;
  std::int64_t step = 0;
  double base_lr = 0.01;
  AdamConfig config;

  static AdamState for_size(Eigen::Index n, double base_lr = 0.01,
                            AdamConfig config = {}) {
    AdamState s;
    s.first_moment = Vector::Zero(n);
    s.second_moment = Vector::Zero(n);
    s.base_lr = base_lr;
    s.config = config;
    return s;
  }
};

// One bias-corrected Adam update of params in place.
template <typename Scalar, typename DerivedP, typename DerivedG>
void adam_step(Eigen::MatrixBase<DerivedP>& params,
               const Eigen::MatrixBase<DerivedG>& grads,
               AdamState<Scalar>& state, double lr) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw InputError("adam_step: parameter, gradient and moment sizes differ");
  }
  if (!(lr > 0.0)) throw InputError("adam_step: learning rate must be > 0");
  if (!grads.allFinite()) throw InputError("adam_step: non-finite gradient");

  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const Scalar b1 = static_cast<Scalar>(c.beta1);
  const Scalar b2 = static_cast<Scalar>(c.beta2);
  state.first_moment = b1 * state.first_moment + (Scalar(1) - b1) * grads;
  state.second_moment = b2 * state.second_moment +
                        (Scalar(1) - b2) * grads.cwiseAbs2();
  const Scalar m_corr = static_cast<Scalar>(1.0 - std::pow(c.beta1, t));
  const Scalar v_corr = static_cast<Scalar>(1.0 - std::pow(c.beta2, t));
  params.derived().array() -=
      static_cast<Scalar>(lr) * (state.first_moment.array() / m_corr) /
      ((state.second_moment.array() / v_corr).sqrt() +
       static_cast<Scalar>(c.epsilon));
}

template <typename Scalar>
AdamState<Scalar> make_adam(const DuelingNet<Scalar>& net, double base_lr = 0.01,
                            AdamConfig config = {}) {
  return AdamState<Scalar>::for_size(parameter_count(net), base_lr, config);
}

template <typename Scalar>
void adam_step(DuelingNet<Scalar>& net, const DuelingNet<Scalar>& grads,
               AdamState<Scalar>& state, double lr) {
  if (!net.same_topology(grads)) {
    throw InputError("adam_step: gradient topology differs from parameters");
  }
  auto flat = flatten(net);
  adam_step(flat, flatten(grads), state, lr);
  unflatten(flat, net);
}

}  // namespace thoughtnav

#endif  // THOUGHTNAV_ADAM_H_
