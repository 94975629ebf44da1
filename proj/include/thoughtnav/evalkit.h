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

#ifndef THOUGHTNAV_EVALKIT_H_
#define THOUGHTNAV_EVALKIT_H_

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thoughtnav/answers.h"
#include "thoughtnav/dueling_net.h"
#include "thoughtnav/reasoning_env.h"

namespace thoughtnav {

// Line-delimited JSON, one {"id","question","answer","kind"} object per line.
// Blank lines are skipped. Extra fields land in metadata.
std::vector<QuestionRecord> parse_dataset(std::istream& in);
std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, std::span<const QuestionRecord> records);
void write_dataset(const std::filesystem::path& path, std::span<const QuestionRecord> records);

nlohmann::json record_to_json(const QuestionRecord& r);

// ---- hard-problem mining ----

enum class MiningStatus { kSolved, kHard, kUndetermined };

struct MiningEntry {
  std::string id;
  MiningStatus status = MiningStatus::kUndetermined;
  std::optional<std::string> extracted;
  std::string error;
  TokenUsage usage;
};

struct MiningResult {
  std::vector<QuestionRecord> hard;
  std::vector<MiningEntry> entries;
  std::size_t total = 0;
  std::size_t undetermined = 0;

  std::size_t hard_count() const { return hard.size(); }
  // Hard / Total, with undetermined questions counted in Total.
  double proportion() const;
  nlohmann::json summary() const;
};

struct MiningConfig {
  std::string model;
  double temperature = 1.0;
  int max_tokens = 1024;
};

MiningResult mine_hard(std::span<const QuestionRecord> dataset, ChatBackend& chat,
                       const MiningConfig& cfg = {});

// ---- policies ----

class Policy {
 public:
  virtual ~Policy() = default;
  // `legal` is never empty. Implementations must be safe to call concurrently.
  virtual ActionKind choose(const ReasoningContext& ctx, const StateVector& state,
                            const ActionMask& legal, Rng& rng) const = 0;
  virtual std::string name() const = 0;
};

class NavigatorPolicy : public Policy {
 public:
  explicit NavigatorPolicy(Navigator net) : net_(std::move(net)) {}
  ActionKind choose(const ReasoningContext& ctx, const StateVector& state,
                    const ActionMask& legal, Rng& rng) const override;
  std::string name() const override { return "navigator"; }

 private:
  Navigator net_;
};

// Decompose, ReasonOneStep, Refine, then Terminate. A scheduled block that is
// not legal is replaced by ReasonOneStep when that is legal, else Terminate.
class FixedSequencePolicy : public Policy {
 public:
  ActionKind choose(const ReasoningContext& ctx, const StateVector& state,
                    const ActionMask& legal, Rng& rng) const override;
  std::string name() const override { return "fixed-sequence"; }
};

class RandomPolicy : public Policy {
 public:
  ActionKind choose(const ReasoningContext& ctx, const StateVector& state,
                    const ActionMask& legal, Rng& rng) const override;
  std::string name() const override { return "random"; }
};

enum class BaselineKind { kFixedSequence, kRandom };
std::unique_ptr<Policy> baseline_policy(BaselineKind kind);

// ---- rollouts and evaluation ----

struct TrialRecord {
  std::vector<ActionKind> actions;  // executed, after remapping
  std::optional<std::string> answer;
  TokenUsage usage;
  bool failed = false;
  std::string error;
  std::vector<CallRecord> transcript;
};

TrialRecord rollout(const ReasoningEnv& env, const Policy& policy,
                    const QuestionRecord& question, Rng& rng);

struct EvalConfig {
  int trials = 3;
  std::uint64_t seed = 0;
  int workers = 1;
  bool keep_transcripts = false;
};

struct QuestionResult {
  std::string id;
  std::string gold;
  DatasetKind kind = DatasetKind::kElementaryMathNumeric;
  std::optional<std::string> final_answer;
  bool correct = false;
  std::optional<VoteResult> vote;
  std::vector<TrialRecord> trials;
  TokenUsage usage;
  double wall_seconds = 0.0;
};

struct RunReport {
  std::string policy;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<QuestionResult> questions;
  std::size_t correct = 0;
  double accuracy = 0.0;
  TokenUsage usage;

  // Timing is left out by default so identical runs serialize identically.
  nlohmann::json to_json(bool include_timing = false) const;
};

// Recounts correct answers and tokens from the per-question records and
// throws VerificationError if the aggregates disagree.
void audit_report(const RunReport& report);

RunReport evaluate(const Policy& policy, std::span<const QuestionRecord> dataset,
                   const EvalConfig& cfg, const ReasoningEnv& env);

}  // namespace thoughtnav

#endif  // THOUGHTNAV_EVALKIT_H_
