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

#ifndef THOUGHTNAV_REASONING_ENV_H_
#define THOUGHTNAV_REASONING_ENV_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thoughtnav/core_types.h"
#include "thoughtnav/environment.h"
#include "thoughtnav/gateway.h"
#include "thoughtnav/parsers.h"
#include "thoughtnav/prm.h"
#include "thoughtnav/prompts.h"

namespace thoughtnav {

struct QuestionRecord {
  std::string id;
  std::string question;
  std::string answer;
  DatasetKind kind = DatasetKind::kElementaryMathNumeric;
  nlohmann::json metadata = nlohmann::json::object();
};

struct EnvConfig {
  int max_actions = 5;
  ActionMask enabled_blocks = ActionMask::all();
  int self_eval_retry = 1;
  double temperature = 1.0;
  int max_tokens = 1024;
  std::string model;
  int max_subtasks = 6;

  // ReasonOneStep and Terminate are forced into enabled_blocks.
  void validate() const;
};

struct CallRecord {
  std::string purpose;  // e.g. "decompose.split", "self_eval"
  ChatExchange exchange;
};

struct StepOutcome {
  ReasoningContext context;  // context after the step
  ActionKind requested = ActionKind::kReasonOneStep;
  ActionKind executed = ActionKind::kReasonOneStep;
  std::string appended;
  StateVector state;
  double reward = 0.0;
  bool done = false;
  bool forced = false;
  std::optional<std::string> final_answer;
  std::optional<SelfEvalReport> evaluation;
  std::vector<CallRecord> transcript;
  TokenUsage usage;

  // Calls made by the logic block itself, excluding self-evaluation.
  std::size_t block_calls() const;
};

struct ResetOutcome {
  ReasoningContext context;
  StateVector state;
  SelfEvalReport evaluation;
  std::vector<CallRecord> transcript;
  TokenUsage usage;
};

ActionMask legal_actions(const ReasoningContext& ctx, const EnvConfig& cfg);

// Runs logic blocks against a chat backend and scores them with a PRM. The
// PRM may be null (inference), in which case rewards are 0.
class ReasoningEnv {
 public:
  ReasoningEnv(ChatBackend& chat, ProcessRewardModel* prm, EnvConfig cfg);

  ResetOutcome reset(const QuestionRecord& question) const;

  // Executes one action. Refine before any action runs as ReasonOneStep; an
  // action outside the legal set when only Terminate is legal runs as a forced
  // Terminate. Throws StepFailure when a sub-pipeline cannot be parsed after
  // its retry, and propagates gateway errors.
  StepOutcome step(const ReasoningContext& ctx, const StateVector& current,
                   ActionKind action) const;

  SelfEvalReport evaluate(const ReasoningContext& ctx,
                          std::vector<CallRecord>& transcript) const;

  const EnvConfig& config() const { return cfg_; }

 private:
  std::string call(PromptId id, const ReasoningContext& ctx, const PromptExtras& extras,
                   const std::string& purpose, std::vector<CallRecord>& transcript) const;

  std::string run_decompose(const ReasoningContext& ctx,
                            std::vector<CallRecord>& transcript) const;
  std::string run_debate(const ReasoningContext& ctx,
                         std::vector<CallRecord>& transcript) const;

  ChatBackend& chat_;
  ProcessRewardModel* prm_;
  EnvConfig cfg_;
};

// Episode wrapper for training: each reset samples one question uniformly.
class ReasoningEpisodeEnv : public Environment {
 public:
  ReasoningEpisodeEnv(const ReasoningEnv& env,
                      std::shared_ptr<const std::vector<QuestionRecord>> questions);

  StateVector reset(Rng& rng) override;
  ActionMask legal_actions() const override;
  EnvStep step(ActionKind action) override;
  int max_actions() const override { return env_.config().max_actions; }

  const ReasoningContext& context() const { return ctx_; }
  const QuestionRecord* question() const { return question_; }
  const std::vector<CallRecord>& transcript() const { return transcript_; }

 private:
  const ReasoningEnv& env_;
  std::shared_ptr<const std::vector<QuestionRecord>> questions_;
  const QuestionRecord* question_ = nullptr;
  ReasoningContext ctx_;
  StateVector state_;
  bool done_ = true;
  std::vector<CallRecord> transcript_;
};

nlohmann::json transcript_to_json(const std::vector<CallRecord>& transcript);

}  // namespace thoughtnav

#endif  // THOUGHTNAV_REASONING_ENV_H_
