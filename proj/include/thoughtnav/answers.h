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

#ifndef THOUGHTNAV_ANSWERS_H_
#define THOUGHTNAV_ANSWERS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thoughtnav/core_types.h"

namespace thoughtnav {

// Final-answer extraction by dataset kind; the last marker in the text wins.
//   boxed   -> content of the innermost \boxed{...}
//   numeric -> value after "The answer is"
//   choice  -> the choice letter, upper-cased
//   yesno   -> "yes" / "no"
// Returns nullopt when the text carries no recognizable marker.
std::optional<std::string> extract_answer(std::string_view text, DatasetKind kind);

bool has_final_answer(std::string_view text, DatasetKind kind);

// Strips LaTeX wrappers and formatting so numerically equal answers compare
// equal as text where possible: "$\frac{1}{2}$" -> "1/2", "1,000" -> "1000".
std::string normalize_math_answer(std::string_view text);

// Plain decimals and simple fractions p/q after normalization.
std::optional<double> parse_numeric_answer(std::string_view text);

// Numeric kinds compare parsed values with relative tolerance 1e-9 and fall
// back to exact comparison of normalized text. Choice and yes/no compare
// case-insensitively.
bool answers_equivalent(std::string_view a, std::string_view b, DatasetKind kind);

struct VoteResult {
  std::vector<std::string> candidates;
  std::string winner;
  std::size_t winner_votes = 0;
  std::size_t classes = 0;
  bool tie_broken = false;
  std::uint64_t seed = 0;
};

// Candidates are grouped greedily: each joins the first class whose
// representative (its first-seen member) it is equivalent to. The largest
// class wins; ties between largest classes are broken uniformly at random
// with the given seed. Throws InputError on an empty candidate list.
VoteResult majority_vote(std::span<const std::string> answers, DatasetKind kind,
                         std::uint64_t seed);

}  // namespace thoughtnav

#endif  // THOUGHTNAV_ANSWERS_H_
