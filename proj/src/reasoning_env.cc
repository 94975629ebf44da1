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

#include "thoughtnav/reasoning_env.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thoughtnav/answers.h"
#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

std::string subtask_block(const std::vector<std::string>& subtasks,
                          const std::vector<std::string>& results, std::size_t count) {
  std::string out;
  for (std::size_t j = 0; j < count; ++j) {
    if (!out.empty()) out += '\n';
    out += fmt::format("### Subtask{}: {}\n{}", j + 1, subtasks[j], results[j]);
  }
  return out;
}

std::vector<std::string> step_texts(const ReasoningContext& ctx) {
  std::vector<std::string> out;
  out.reserve(ctx.steps.size());
  for (const ReasoningStep& s : ctx.steps) out.push_back(s.text);
  return out;
}

}  // namespace

void EnvConfig::validate() const {
  if (max_actions < 1) throw ConfigError("max_actions must be >= 1");
  if (self_eval_retry < 0) throw ConfigError("self_eval_retry must be >= 0");
  if (max_subtasks < 1) throw ConfigError("max_subtasks must be >= 1");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (!enabled_blocks.contains(ActionKind::kReasonOneStep) ||
      !enabled_blocks.contains(ActionKind::kTerminate)) {
    throw ConfigError("ReasonOneStep and Terminate must stay enabled");
  }
}

std::size_t StepOutcome::block_calls() const {
  std::size_t n = 0;
  for (const CallRecord& c : transcript) n += c.purpose != "self_eval" ? 1 : 0;
  return n;
}

ActionMask legal_actions(const ReasoningContext& ctx, const EnvConfig& cfg) {
  return masked_actions(ctx.answer_present, ctx.actions_taken(), cfg.max_actions,
                        cfg.enabled_blocks);
}

ReasoningEnv::ReasoningEnv(ChatBackend& chat, ProcessRewardModel* prm, EnvConfig cfg)
    : chat_(chat), prm_(prm), cfg_(std::move(cfg)) {
  cfg_.validate();
}

std::string ReasoningEnv::call(PromptId id, const ReasoningContext& ctx,
                               const PromptExtras& extras, const std::string& purpose,
                               std::vector<CallRecord>& transcript) const {
  ChatRequest req;
  req.user = render_prompt(id, ctx, extras);
  req.model = cfg_.model;
  req.temperature = cfg_.temperature;
  req.max_tokens = cfg_.max_tokens;
  ChatExchange ex = chat_.complete(req);
  std::string text = ex.response;
  transcript.push_back({purpose, std::move(ex)});
  return text;
}

SelfEvalReport ReasoningEnv::evaluate(const ReasoningContext& ctx,
                                      std::vector<CallRecord>& transcript) const {
  std::optional<SelfEvalReport> best;
  for (int attempt = 0; attempt <= cfg_.self_eval_retry; ++attempt) {
    const std::string text = call(PromptId::kSelfEvaluation, ctx, {}, "self_eval", transcript);
    try {
      SelfEvalReport r = parse_self_eval(text);
      if (r.complete()) return r;
      if (!best || r.found_count() > best->found_count()) best = std::move(r);
    } catch (const MalformedEvaluationError&) {
      spdlog::debug("self-evaluation attempt {} had no markers", attempt + 1);
    }
  }
  if (!best) {
    throw MalformedEvaluationError(fmt::format(
        "self-evaluation unparseable after {} attempts", cfg_.self_eval_retry + 1));
  }
  for (int aspect : best->missing()) {
    spdlog::warn("self-evaluation missing {}; defaulting to 0", aspect_label(aspect));
  }
  return *best;
}

ResetOutcome ReasoningEnv::reset(const QuestionRecord& question) const {
  if (question.question.empty()) {
    throw InputError(fmt::format("question '{}' has empty text", question.id));
  }
  ResetOutcome out;
  out.context.problem = question.question;
  out.context.dataset_kind = question.kind;
  out.evaluation = evaluate(out.context, out.transcript);
  out.state = out.evaluation.state();
  for (const CallRecord& c : out.transcript) out.usage += c.exchange.usage;
  return out;
}

std::string ReasoningEnv::run_decompose(const ReasoningContext& ctx,
                                        std::vector<CallRecord>& transcript) const {
  std::vector<std::string> subtasks;
  for (int attempt = 0;; ++attempt) {
    const std::string text = call(PromptId::kDecomposeSplit, ctx, {},
                                  attempt == 0 ? "decompose.split" : "decompose.split.retry",
                                  transcript);
    try {
      subtasks = parse_subtasks(text);
      break;
    } catch (const ParseError& e) {
      if (attempt >= 1) throw StepFailure(fmt::format("decompose: {}", e.what()));
    }
  }
  if (subtasks.size() > static_cast<std::size_t>(cfg_.max_subtasks)) {
    spdlog::warn("decompose produced {} subtasks; keeping the first {}", subtasks.size(),
                 cfg_.max_subtasks);
    subtasks.resize(static_cast<std::size_t>(cfg_.max_subtasks));
  }

  std::vector<std::string> results;
  for (std::size_t k = 0; k < subtasks.size(); ++k) {
    PromptExtras extras;
    extras.previous_subtask_results = subtask_block(subtasks, results, k);
    extras.subtask_id = fmt::format("{}: {}", k + 1, subtasks[k]);
    results.push_back(call(PromptId::kDecomposeExecute, ctx, extras,
                           "decompose.subtask", transcript));
  }
  PromptExtras summary;
  summary.subtask_results = subtask_block(subtasks, results, subtasks.size());
  return call(PromptId::kDecomposeSummary, ctx, summary, "decompose.summary", transcript);
}

std::string ReasoningEnv::run_debate(const ReasoningContext& ctx,
                                     std::vector<CallRecord>& transcript) const {
  std::string plans_text;
  std::vector<std::string> plans;
  for (int attempt = 0;; ++attempt) {
    plans_text = call(PromptId::kDebatePlans, ctx, {},
                      attempt == 0 ? "debate.plans" : "debate.plans.retry", transcript);
    try {
      plans = parse_plans(plans_text);
      break;
    } catch (const ParseError& e) {
      if (attempt >= 1) throw StepFailure(fmt::format("debate: {}", e.what()));
    }
  }

  PromptExtras extras;
  extras.plans = plans_text;
  const int plan_count = static_cast<int>(plans.size());
  int chosen = 0;
  for (int attempt = 0; attempt < 2 && chosen == 0; ++attempt) {
    const std::string text = call(PromptId::kDebateChoose, ctx, extras,
                                  attempt == 0 ? "debate.choice" : "debate.choice.retry",
                                  transcript);
    try {
      chosen = parse_plan_choice(text, plan_count);
    } catch (const ParseError& e) {
      spdlog::debug("debate choice attempt {}: {}", attempt + 1, e.what());
    }
  }
  if (chosen == 0) {
    spdlog::warn("debate choice unparseable; falling back to Plan1");
    chosen = 1;
  }
  extras.plan = fmt::format("Plan{}: {}", chosen, plans[static_cast<std::size_t>(chosen - 1)]);
  return call(PromptId::kDebateExecute, ctx, extras, "debate.execute", transcript);
}

StepOutcome ReasoningEnv::step(const ReasoningContext& ctx, const StateVector& current,
                               ActionKind action) const {
  StepOutcome out;
  out.requested = action;
  out.executed = action;
  const ActionMask legal = legal_actions(ctx, cfg_);
  if (!legal.contains(action)) {
    if (legal == ActionMask{ActionKind::kTerminate}) {
      out.executed = ActionKind::kTerminate;
      out.forced = true;
    } else if (action == ActionKind::kRefine && ctx.actions_taken() == 0) {
      out.executed = ActionKind::kReasonOneStep;
    } else {
      throw InputError(fmt::format("action {} is not legal here", action_name(action)));
    }
  }

  std::string text;
  switch (out.executed) {
    case ActionKind::kReasonOneStep:
      text = call(PromptId::kReasonOneStep, ctx, {}, "reason", out.transcript);
      break;
    case ActionKind::kDecompose:
      text = run_decompose(ctx, out.transcript);
      break;
    case ActionKind::kDebate:
      text = run_debate(ctx, out.transcript);
      break;
    case ActionKind::kRefine:
      text = call(PromptId::kRefine, ctx, {}, "refine", out.transcript);
      break;
    case ActionKind::kTerminate:
      text = call(terminate_prompt(ctx.dataset_kind), ctx, {}, "terminate", out.transcript);
      break;
  }

  out.context = ctx;
  out.context.steps.push_back({out.executed, text});
  out.context.actions.push_back(out.executed);
  out.appended = text;
  if (out.executed == ActionKind::kTerminate) {
    out.final_answer = extract_answer(text, ctx.dataset_kind);
    out.context.answer_present = out.final_answer.has_value();
    out.done = true;
  } else {
    out.context.answer_present = has_final_answer(text, ctx.dataset_kind);
  }

  if (prm_ != nullptr) {
    const auto texts = step_texts(out.context);
    out.reward = score_process(*prm_, out.context.problem, texts);
  }

  if (out.done) {
    out.state = current;
  } else {
    out.evaluation = evaluate(out.context, out.transcript);
    out.state = out.evaluation->state();
  }
  for (const CallRecord& c : out.transcript) out.usage += c.exchange.usage;
  return out;
}

ReasoningEpisodeEnv::ReasoningEpisodeEnv(
    const ReasoningEnv& env, std::shared_ptr<const std::vector<QuestionRecord>> questions)
    : env_(env), questions_(std::move(questions)) {
  if (!questions_ || questions_->empty()) {
    throw InputError("training needs at least one question");
  }
}

StateVector ReasoningEpisodeEnv::reset(Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, questions_->size() - 1);
  question_ = &(*questions_)[pick(rng)];
  transcript_.clear();
  done_ = true;
  ResetOutcome r = env_.reset(*question_);
  ctx_ = std::move(r.context);
  state_ = r.state;
  transcript_ = std::move(r.transcript);
  done_ = false;
  return state_;
}

ActionMask ReasoningEpisodeEnv::legal_actions() const {
  if (done_) return {};
  return thoughtnav::legal_actions(ctx_, env_.config());
}

EnvStep ReasoningEpisodeEnv::step(ActionKind action) {
  if (done_) throw InputError("step on a finished episode");
  StepOutcome out = env_.step(ctx_, state_, action);
  ctx_ = std::move(out.context);
  state_ = out.state;
  done_ = out.done;
  for (CallRecord& c : out.transcript) transcript_.push_back(std::move(c));
  return {state_, out.reward, out.done};
}

nlohmann::json transcript_to_json(const std::vector<CallRecord>& transcript) {
  nlohmann::json calls = nlohmann::json::array();
  for (const CallRecord& c : transcript) {
    calls.push_back({{"purpose", c.purpose},
                     {"prompt", c.exchange.request.user},
                     {"response", c.exchange.response},
                     {"input_tokens", c.exchange.usage.input},
                     {"output_tokens", c.exchange.usage.output},
                     {"attempts", c.exchange.attempts}});
  }
  return calls;
}

}  // namespace thoughtnav
