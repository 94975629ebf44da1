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

#ifndef THOUGHTNAV_CORE_TYPES_H_
#define THOUGHTNAV_CORE_TYPES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace thoughtnav {

inline constexpr int kNumAspects = 7;
inline constexpr int kNumActions = 5;

// Logic blocks. The integer values are the network's output indices.
enum class ActionKind : std::uint8_t {
  kReasonOneStep = 0,
  kDecompose = 1,
  kDebate = 2,
  kRefine = 3,
  kTerminate = 4,
};

inline constexpr std::array<ActionKind, kNumActions> kAllActions = {
    ActionKind::kReasonOneStep, ActionKind::kDecompose, ActionKind::kDebate,
    ActionKind::kRefine, ActionKind::kTerminate};

constexpr int action_index(ActionKind a) noexcept {
  return static_cast<int>(a);
}

// Throws InputError for indices outside 0..4.
ActionKind action_from_index(int index);

std::string_view action_name(ActionKind a) noexcept;
// Accepts the names produced by action_name (case-insensitive).
ActionKind action_from_name(std::string_view name);

// Small set of actions, one bit per ActionKind.
class ActionMask {
 public:
  constexpr ActionMask() = default;
  constexpr ActionMask(std::initializer_list<ActionKind> actions) {
    for (ActionKind a : actions) insert(a);
  }
  static constexpr ActionMask all() {
    ActionMask m;
    m.bits_ = (1u << kNumActions) - 1;
    return m;
  }

  constexpr void insert(ActionKind a) { bits_ |= bit(a); }
  constexpr void erase(ActionKind a) { bits_ &= ~bit(a); }
  constexpr bool contains(ActionKind a) const { return (bits_ & bit(a)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const {
    int n = 0;
    for (ActionKind a : kAllActions) n += contains(a) ? 1 : 0;
    return n;
  }
  // Members in index order.
  std::vector<ActionKind> members() const;
  constexpr std::uint8_t bits() const { return bits_; }

  friend constexpr bool operator==(ActionMask, ActionMask) = default;

 private:
  static constexpr std::uint8_t bit(ActionKind a) {
    return static_cast<std::uint8_t>(1u << action_index(a));
  }
  std::uint8_t bits_ = 0;
};

// Self-evaluation aspects in serialization order.
enum class Aspect : std::uint8_t {
  kModelingCorrectness = 0,    // A1
  kClarity = 1,                // A2
  kCalculationCorrectness = 2, // A3
  kComplexityToAnswer = 3,     // B1
  kAlternativeMethods = 4,     // B2
  kClosenessToSolution = 5,    // C1
  kStepCompleteness = 6,       // C2
};

// "A1".."C2"
std::string_view aspect_label(int aspect_index);

// Seven self-evaluation scores, each in {0,1,2,3}:
// 0 not involved, 1 false, 2 unsure, 3 true.
class StateVector {
 public:
  using Scores = std::array<std::uint8_t, kNumAspects>;

  StateVector() = default;
  // Throws InputError if any score is outside 0..3.
  explicit StateVector(const std::array<int, kNumAspects>& scores);

  int operator[](int aspect) const { return scores_[aspect]; }
  int at(Aspect a) const { return scores_[static_cast<int>(a)]; }
  const Scores& scores() const { return scores_; }
  std::array<int, kNumAspects> to_array() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;
  friend auto operator<=>(const StateVector&, const StateVector&) = default;

 private:
  Scores scores_{};
};

using EncodedState = Eigen::Matrix<double, kNumAspects, 1>;

// Component i is scores[i] / 3.
template <typename Scalar = double>
Eigen::Matrix<Scalar, kNumAspects, 1> encode_state(const StateVector& s) {
  Eigen::Matrix<Scalar, kNumAspects, 1> x;
  for (int i = 0; i < kNumAspects; ++i) {
    x(i) = static_cast<Scalar>(s[i]) / Scalar(3);
  }
  return x;
}

enum class DatasetKind : std::uint8_t {
  kElementaryMathNumeric,  // GSM8K-style "The answer is <n>"
  kMathBoxed,              // MATH-style \boxed{...}
  kMultipleChoice,         // MMLU-STEM / GPQA "(CHOICE)"
  kYesNo,                  // StrategyQA
};

std::string_view dataset_kind_name(DatasetKind k) noexcept;
// Accepts canonical names ("numeric", "boxed", "choice", "yesno") and common
// benchmark aliases ("gsm8k", "math", "gpqa", "mmlu", "strategyqa").
DatasetKind dataset_kind_from_name(std::string_view name);

struct ReasoningStep {
  ActionKind source = ActionKind::kReasonOneStep;
  std::string text;
};

// Problem text plus the reasoning accumulated so far.
struct ReasoningContext {
  std::string problem;
  std::vector<ReasoningStep> steps;
  std::vector<ActionKind> actions;
  bool answer_present = false;
  DatasetKind dataset_kind = DatasetKind::kElementaryMathNumeric;

  int actions_taken() const { return static_cast<int>(actions.size()); }
};

struct Transition {
  StateVector state;
  ActionKind action = ActionKind::kReasonOneStep;
  double reward = 0.0;
  StateVector next_state;
  bool done = false;
};

struct Trajectory {
  std::string question_id;
  std::vector<Transition> transitions;
  std::optional<std::string> final_answer;
};

}  // namespace thoughtnav

#endif  // THOUGHTNAV_CORE_TYPES_H_
