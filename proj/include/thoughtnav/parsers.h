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

#ifndef THOUGHTNAV_PARSERS_H_
#define THOUGHTNAV_PARSERS_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "thoughtnav/core_types.h"

namespace thoughtnav {

struct AspectScore {
  int score = 0;
  std::string reason;
  bool found = false;
};

struct SelfEvalReport {
  std::array<AspectScore, kNumAspects> aspects{};
  std::string raw;

  int found_count() const;
  bool complete() const { return found_count() == kNumAspects; }
  std::vector<int> missing() const;
  // Missing aspects read as 0.
  StateVector state() const;
};

// Extracts "A1 score=3 reason=..." markers, tolerant of case, whitespace,
// brackets and a colon after the label. The first marker per aspect wins;
// scores outside 0..3 are ignored. Throws MalformedEvaluationError when the
// text has no marker at all.
SelfEvalReport parse_self_eval(std::string_view text);

// Splits on "### Subtask<k>:" markers. Output is ordered by k (stable for
// repeated indices). Throws ParseError when no marker is present.
std::vector<std::string> parse_subtasks(std::string_view text);

// Same convention for "### Plan<k>:" markers.
std::vector<std::string> parse_plans(std::string_view text);

// Index from "The most promising plan is Plan<k>". Throws ParseError when the
// marker is missing or k is outside 1..plan_count.
int parse_plan_choice(std::string_view text, int plan_count = 3);

}  // namespace thoughtnav

#endif  // THOUGHTNAV_PARSERS_H_
