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

#include "thoughtnav/prompts.h"

#include <fmt/format.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

// Trailing spaces on some lines are part of the templates.
constexpr std::string_view kSelfEvaluation =
    "{Problem and reasoning steps}\n"
    "Please evaluate the current step from the following aspects. \n"
    "A) Correctness\n"
    "    A1: Correctness of modeling:\n"
    "    Whether the current step is correctly derived from the origin problem.\n"
    "    A2: Clarity for further reasoning:\n"
    "    Whether the current step is clearly presented, without ambiguity, to support further reasoning.\n"
    "    A3: Correctness of calculation:\n"
    "    Whether the numerical computation in the current step is performed correctly. \n"
    "B) Complexity\n"
    "    B1: Complexity to reach the final answer:\n"
    "    Whether it still requires complex reasoning or calculation to reach the final answer from the current step.\n"
    "    B2: Alternative methods in further reasoning:\n"
    "    Whether there exist multiple alternative methods to solve the problem in the current step.\n"
    "C) Completeness\n"
    "    C1: Closeness to the final solution:\n"
    "    Whether the current step is close enough to directly reach the final answer.\n"
    "    C2: Completeness within the step:\n"
    "    Whether all necessary elements within this specific step are known from the problem or previous steps.\n"
    "For each aspect, please score 1 for False, 2 for Unsure, and 3 for True, and score 0 if the current step does not involve this aspect. Please attach the reason for each score.\n"
    "Use the format 'A1 score=[SCORE] reason=[REASON]'.\n"
    "Only score the current reasoning step here, and DONOT conduct further reasoning.";

constexpr std::string_view kReasonOneStep =
    "Here is a problem and several reasoning steps.\n"
    "{Problem and previous steps}\n"
    "Please reason exactly ONE more step based on the current step here, and DONOT reason too many steps at once.";

constexpr std::string_view kDecomposeSplit =
    "Here is a problem and several reasoning steps.\n"
    "{Problem and previous steps}\n"
    "Please decompose the current task into subtasks, where we can solve the original problem by combining these results of subtasks.\n"
    "Only provide subtasks decomposition here, and DONOT conduct specific reasoning or calculation.\n"
    "Use the format '### Subtask1: subtask1'.";

constexpr std::string_view kDecomposeExecute =
    "Here is a problem and several reasoning steps.\n"
    "{Problem and reasoning steps before decomposition}\n"
    "For the next step, the task is decomposed into subtasks, here are the reasonings in the first few subtasks.\n"
    "{Executing results of previous subtasks}\n"
    "Please conduct the following Subtask{subtask_id} to continue the reasoning.\n"
    "DONOT conduct a more detailed decomposition for the subtask.";

constexpr std::string_view kDecomposeSummary =
    "Here are a few detailed reasoning subtasks of a problem.\n"
    "{Executing results of subtasks}\n"
    "Please give a clear and concise summary of these subtasks, keeping the key reasoning and results in each subtask. \n"
    "Only provide the summary here, and DONOT conduct more reasoning or calculation.";

constexpr std::string_view kDebatePlans =
    "Here is a problem and several reasoning steps.\n"
    "{Problem and previous reasoning steps}\n"
    "Please propose three different alternative plans for solving the problem in the current step.\n"
    "Only provide plans here, and DONOT conduct specific reasoning or calculation.\n"
    "Use the format '### Plan1: plan1'.";

constexpr std::string_view kDebateChoose =
    "Here is a problem and several reasoning steps.\n"
    "{Problem and previous reasoning steps}\n"
    "Currently, we have several alternative plans for solving the problem in the current step.\n"
    "{Generated Plans}\n"
    "Please review and compare these plans carefully, and tell which one is most promising for further reasoning. Only compare the plans here, and DONOT conduct further reasoning or calculation.\n"
    "Use the format 'The most promising plan is Plan[INDEX]: [REASON]', where [INDEX] is an integer index of the plan and [REASON] is a detailed analysis.";

constexpr std::string_view kDebateExecute =
    "Here is a problem and several reasoning steps.\n"
    "{Problem and previous reasoning steps}\n"
    "For the next step, we have decided on the most promising plan:\n"
    "{Plan}\n"
    "Please reason **exactly one** more step according to the plan here, and DONOT reason too many steps at once.";

constexpr std::string_view kRefine =
    "Here is a problem and several reasoning steps\n"
    "{Problem and previous reasoning steps}\n"
    "Please check and refine the current thought here, and DONOT conduct further reasoning or calculation.";

constexpr std::string_view kTerminateNumeric =
    "Here is a problem and several reasoning steps\n"
    "{Problem and previous reasoning steps}\n"
    "Please generate the answer for the problem. Please end the answer with 'The answer is numerical_answer'.";

constexpr std::string_view kTerminateBoxed =
    "Here is a problem and several reasoning steps\n"
    "{Problem and previous reasoning steps}\n"
    "Please generate the answer for the problem. Wrap the answer with \\boxed{{answer}}.";

constexpr std::string_view kTerminateChoice =
    "Here is a problem and several reasoning steps\n"
    "{Problem and previous reasoning steps}\n"
    "End the answer with 'The answer is (CHOICE)'.";

constexpr std::string_view kTerminateYesNo =
    "Here is a problem and several reasoning steps\n"
    "{Problem and previous reasoning steps}\n"
    "Please generate the answer for the problem. At the end of your answer, conclude the answer with 'The answer is yes' or 'The answer is no'.";

// Direct prompts used for hard-question mining.
constexpr std::string_view kDirectNumeric =
    "{Problem} Please generate the answer for the problem. \n"
    "Please end the answer with 'The answer is numerical_answer'.";

constexpr std::string_view kDirectBoxed =
    "{Problem} Please generate the answer for the problem. \n"
    "Wrap the answer with boxed{{answer}}.";

constexpr std::string_view kDirectChoice =
    "{Problem} Please generate the answer for the problem. \n"
    "End the answer with 'The answer is (CHOICE)'.";

constexpr std::string_view kDirectYesNo =
    "{Problem} Please generate the answer for the problem. \n"
    "End the answer with 'YES/NO'.";

void require(std::string_view value, std::string_view what, PromptId id) {
  if (value.empty()) {
    throw InputError(fmt::format("prompt {} needs {}", prompt_name(id), what));
  }
}

}  // namespace

std::string_view prompt_template(PromptId id) {
  switch (id) {
    case PromptId::kSelfEvaluation: return kSelfEvaluation;
    case PromptId::kReasonOneStep: return kReasonOneStep;
    case PromptId::kDecomposeSplit: return kDecomposeSplit;
    case PromptId::kDecomposeExecute: return kDecomposeExecute;
    case PromptId::kDecomposeSummary: return kDecomposeSummary;
    case PromptId::kDebatePlans: return kDebatePlans;
    case PromptId::kDebateChoose: return kDebateChoose;
    case PromptId::kDebateExecute: return kDebateExecute;
    case PromptId::kRefine: return kRefine;
    case PromptId::kTerminateNumeric: return kTerminateNumeric;
    case PromptId::kTerminateBoxed: return kTerminateBoxed;
    case PromptId::kTerminateChoice: return kTerminateChoice;
    case PromptId::kTerminateYesNo: return kTerminateYesNo;
    case PromptId::kDirectNumeric: return kDirectNumeric;
    case PromptId::kDirectBoxed: return kDirectBoxed;
    case PromptId::kDirectChoice: return kDirectChoice;
    case PromptId::kDirectYesNo: return kDirectYesNo;
  }
  throw InputError("unknown prompt id");
}

std::string_view prompt_name(PromptId id) {
  switch (id) {
    case PromptId::kSelfEvaluation: return "self_evaluation";
    case PromptId::kReasonOneStep: return "reason_one_step";
    case PromptId::kDecomposeSplit: return "decompose_split";
    case PromptId::kDecomposeExecute: return "decompose_execute";
    case PromptId::kDecomposeSummary: return "decompose_summary";
    case PromptId::kDebatePlans: return "debate_plans";
    case PromptId::kDebateChoose: return "debate_choose";
    case PromptId::kDebateExecute: return "debate_execute";
    case PromptId::kRefine: return "refine";
    case PromptId::kTerminateNumeric: return "terminate_numeric";
    case PromptId::kTerminateBoxed: return "terminate_boxed";
    case PromptId::kTerminateChoice: return "terminate_choice";
    case PromptId::kTerminateYesNo: return "terminate_yesno";
    case PromptId::kDirectNumeric: return "direct_numeric";
    case PromptId::kDirectBoxed: return "direct_boxed";
    case PromptId::kDirectChoice: return "direct_choice";
    case PromptId::kDirectYesNo: return "direct_yesno";
  }
  return "unknown";
}

std::vector<PromptId> all_prompts() {
  std::vector<PromptId> ids;
  for (int i = 0; i <= static_cast<int>(PromptId::kDirectYesNo); ++i) {
    ids.push_back(static_cast<PromptId>(i));
  }
  return ids;
}

PromptId terminate_prompt(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kElementaryMathNumeric: return PromptId::kTerminateNumeric;
    case DatasetKind::kMathBoxed: return PromptId::kTerminateBoxed;
    case DatasetKind::kMultipleChoice: return PromptId::kTerminateChoice;
    case DatasetKind::kYesNo: return PromptId::kTerminateYesNo;
  }
  throw InputError("unknown dataset kind");
}

PromptId direct_prompt(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kElementaryMathNumeric: return PromptId::kDirectNumeric;
    case DatasetKind::kMathBoxed: return PromptId::kDirectBoxed;
    case DatasetKind::kMultipleChoice: return PromptId::kDirectChoice;
    case DatasetKind::kYesNo: return PromptId::kDirectYesNo;
  }
  throw InputError("unknown dataset kind");
}

std::string render_reasoning(const ReasoningContext& ctx) {
  std::string out = ctx.problem;
  for (std::size_t i = 0; i < ctx.steps.size(); ++i) {
    const ReasoningStep& step = ctx.steps[i];
    if (step.source == ActionKind::kRefine && i > 0) {
      out += fmt::format("\nStep {} (refinement of step {}): {}", i + 1, i, step.text);
    } else {
      out += fmt::format("\nStep {}: {}", i + 1, step.text);
    }
  }
  return out;
}

std::string render_prompt(PromptId id, const ReasoningContext& ctx,
                          const PromptExtras& extras) {
  if (ctx.problem.empty()) throw InputError("cannot render a prompt for an empty problem");
  switch (id) {
    case PromptId::kDecomposeExecute:
      require(extras.subtask_id, "a subtask id", id);
      break;
    case PromptId::kDecomposeSummary:
      require(extras.subtask_results, "subtask results", id);
      break;
    case PromptId::kDebateChoose:
      require(extras.plans, "generated plans", id);
      break;
    case PromptId::kDebateExecute:
      require(extras.plan, "a chosen plan", id);
      break;
    default:
      break;
  }
  const std::string reasoning = render_reasoning(ctx);
  const std::pair<std::string_view, std::string_view> fills[] = {
      {"{Problem and reasoning steps before decomposition}", reasoning},
      {"{Problem and reasoning steps}", reasoning},
      {"{Problem and previous reasoning steps}", reasoning},
      {"{Problem and previous steps}", reasoning},
      {"{Problem}", ctx.problem},
      {"{Executing results of previous subtasks}", extras.previous_subtask_results},
      {"{Executing results of subtasks}", extras.subtask_results},
      {"{subtask_id}", extras.subtask_id},
      {"{Generated Plans}", extras.plans},
      {"{Plan}", extras.plan},
  };

  // Single pass over the template so substituted text is never re-expanded.
  const std::string_view tpl = prompt_template(id);
  std::string out;
  out.reserve(tpl.size() + reasoning.size());
  for (std::size_t i = 0; i < tpl.size();) {
    bool filled = false;
    if (tpl[i] == '{') {
      for (const auto& [key, value] : fills) {
        if (tpl.substr(i, key.size()) == key) {
          out += value;
          i += key.size();
          filled = true;
          break;
        }
      }
    }
    if (!filled) out += tpl[i++];
  }
  return out;
}

}  // namespace thoughtnav
