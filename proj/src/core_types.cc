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

#include "thoughtnav/core_types.h"

#include <algorithm>
#include <cctype>
#include <string>

#include <fmt/format.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

ActionKind action_from_index(int index) {
  if (index < 0 || index >= kNumActions) {
    throw InputError(fmt::format("action index {} out of range 0..{}", index,
                                 kNumActions - 1));
  }
  return static_cast<ActionKind>(index);
}

std::string_view action_name(ActionKind a) noexcept {
  switch (a) {
    case ActionKind::kReasonOneStep: return "reason_one_step";
    case ActionKind::kDecompose: return "decompose";
    case ActionKind::kDebate: return "debate";
    case ActionKind::kRefine: return "refine";
    case ActionKind::kTerminate: return "terminate";
  }
  return "unknown";
}

ActionKind action_from_name(std::string_view name) {
  const std::string n = lower(name);
  for (ActionKind a : kAllActions) {
    if (n == action_name(a)) return a;
  }
  if (n == "reason") return ActionKind::kReasonOneStep;
  throw InputError(fmt::format("unknown action '{}'", name));
}

std::vector<ActionKind> ActionMask::members() const {
  std::vector<ActionKind> out;
  for (ActionKind a : kAllActions) {
    if (contains(a)) out.push_back(a);
  }
  return out;
}

std::string_view aspect_label(int aspect_index) {
  static constexpr std::array<std::string_view, kNumAspects> kLabels = {
      "A1", "A2", "A3", "B1", "B2", "C1", "C2"};
  if (aspect_index < 0 || aspect_index >= kNumAspects) {
    throw InputError(fmt::format("aspect index {} out of range", aspect_index));
  }
  return kLabels[aspect_index];
}

StateVector::StateVector(const std::array<int, kNumAspects>& scores) {
  for (int i = 0; i < kNumAspects; ++i) {
    if (scores[i] < 0 || scores[i] > 3) {
      throw InputError(fmt::format("score {} for {} outside 0..3", scores[i],
                                   aspect_label(i)));
    }
    scores_[i] = static_cast<std::uint8_t>(scores[i]);
  }
}

std::array<int, kNumAspects> StateVector::to_array() const {
  std::array<int, kNumAspects> out{};
  std::copy(scores_.begin(), scores_.end(), out.begin());
  return out;
}

std::string_view dataset_kind_name(DatasetKind k) noexcept {
  switch (k) {
    case DatasetKind::kElementaryMathNumeric: return "numeric";
    case DatasetKind::kMathBoxed: return "boxed";
    case DatasetKind::kMultipleChoice: return "choice";
    case DatasetKind::kYesNo: return "yesno";
  }
  return "unknown";
}

DatasetKind dataset_kind_from_name(std::string_view name) {
  const std::string n = lower(name);
  if (n == "numeric" || n == "gsm8k") return DatasetKind::kElementaryMathNumeric;
  if (n == "boxed" || n == "math") return DatasetKind::kMathBoxed;
  if (n == "choice" || n == "gpqa" || n == "mmlu" || n == "mmlu-stem") {
    return DatasetKind::kMultipleChoice;
  }
  if (n == "yesno" || n == "strategyqa") return DatasetKind::kYesNo;
  throw InputError(fmt::format("unknown dataset kind '{}'", name));
}

}  // namespace thoughtnav
