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

#ifndef THOUGHTNAV_INTERNAL_RETRY_IMPL_H_
#define THOUGHTNAV_INTERNAL_RETRY_IMPL_H_

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {

template <typename Fn>
auto with_retries(const RetryPolicy& policy, const Sleeper& sleep, Fn&& fn,
                  int& attempts) -> decltype(fn()) {
  const int budget = std::max(1, policy.max_attempts);
  std::string last;
  for (attempts = 1;; ++attempts) {
    try {
      return fn();
    } catch (const TransientError& e) {
      last = e.what();
      if (attempts >= budget) break;
      const double factor = std::pow(policy.backoff_multiplier, attempts - 1);
      if (sleep) {
        sleep(std::chrono::milliseconds(static_cast<std::int64_t>(
            static_cast<double>(policy.backoff_base.count()) * factor)));
      }
    }
  }
  throw RetryBudgetExhausted(
      fmt::format("gave up after {} attempts: {}", attempts, last), attempts);
}

}  // namespace thoughtnav

#endif  // THOUGHTNAV_INTERNAL_RETRY_IMPL_H_
