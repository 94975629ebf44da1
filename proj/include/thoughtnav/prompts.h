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

#ifndef THOUGHTNAV_PROMPTS_H_
#define THOUGHTNAV_PROMPTS_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "thoughtnav/core_types.h"

namespace thoughtnav {

enum class PromptId {
  kSelfEvaluation,
  kReasonOneStep,
  kDecomposeSplit,
  kDecomposeExecute,
  kDecomposeSummary,
  kDebatePlans,
  kDebateChoose,
  kDebateExecute,
  kRefine,
  kTerminateNumeric,
  kTerminateBoxed,
  kTerminateChoice,
  kTerminateYesNo,
  kDirectNumeric,
  kDirectBoxed,
  kDirectChoice,
  kDirectYesNo,
};

// Verbatim template text. Placeholders are written in braces exactly as the
// template uses them, e.g. "{Problem and previous steps}".
std::string_view prompt_template(PromptId id);
std::string_view prompt_name(PromptId id);
std::vector<PromptId> all_prompts();

PromptId terminate_prompt(DatasetKind kind);
PromptId direct_prompt(DatasetKind kind);

// Problem text followed by "Step k: ..." lines.
std::string render_reasoning(const ReasoningContext& ctx);

// Values for sub-pipeline placeholders.
struct PromptExtras {
  std::string previous_subtask_results;  // {Executing results of previous subtasks}
  std::string subtask_id;                // {subtask_id}
  std::string subtask_results;           // {Executing results of subtasks}
  std::string plans;                     // {Generated Plans}
  std::string plan;                      // {Plan}
};

// Fills the template. Throws InputError when a template needs an extra that
// is empty (the previous-subtask block may legitimately be empty).
std::string render_prompt(PromptId id, const ReasoningContext& ctx,
                          const PromptExtras& extras = {});

}  // namespace thoughtnav

#endif  // THOUGHTNAV_PROMPTS_H_
