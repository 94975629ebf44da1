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

#ifndef THOUGHTNAV_PIPELINE_H_
#define THOUGHTNAV_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thoughtnav/dqn.h"
#include "thoughtnav/evalkit.h"
#include "thoughtnav/gateway.h"
#include "thoughtnav/prm.h"
#include "thoughtnav/reasoning_env.h"
#include "thoughtnav/synthetic_env.h"

namespace thoughtnav {

struct SynthConfig {
  SyntheticSpec spec;
  std::uint64_t mdp_seed = 0;
  int seeds = 5;           // training seeds: seed, seed+1, ...
  double threshold = 0.95; // greedy / optimal
  int min_passing = 4;
};

// Everything a command needs, merged from a config file, the environment and
// flags (in that order of increasing precedence).
struct RunConfig {
  BackendConfig chat;
  std::string chat_script;  // scripted fixture path; empty selects the wire backend
  PrmConfig prm;
  std::string prm_script;
  TrainerConfig trainer;
  EnvConfig env;
  EvalConfig eval;
  SynthConfig synth;
  std::uint64_t seed = 0;
  std::string dataset;
  std::string output_dir = "runs";
  std::string run_dir;  // overrides output_dir/<timestamp>-seed<seed>
  std::string checkpoint;
  std::string policy = "navigator";  // navigator | fixed-sequence | random
  int checkpoint_every = 500;
  int max_consecutive_failures = 20;  // 0 disables the limit
  bool report_timing = false;

  // Copies seed into the trainer and evaluator; validates every section.
  void finalize();
};

nlohmann::json to_json(const RunConfig& cfg);
// Overlays the keys present in j onto cfg. Unknown keys are a ConfigError.
void merge_json(RunConfig& cfg, const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();
// THOUGHTNAV_BASE_URL, THOUGHTNAV_MODEL, THOUGHTNAV_PRM_URL, THOUGHTNAV_SEED,
// THOUGHTNAV_OUTPUT_DIR.
void apply_env(RunConfig& cfg, const EnvLookup& lookup);

std::filesystem::path resolve_run_dir(const RunConfig& cfg);
void write_resolved_config(const std::filesystem::path& dir, const RunConfig& cfg);

std::unique_ptr<ChatBackend> make_chat_backend(const RunConfig& cfg);
std::unique_ptr<ProcessRewardModel> make_prm(const RunConfig& cfg);

struct MineOutput {
  MiningResult result;
  std::filesystem::path hard_set;
};
MineOutput run_mine(const RunConfig& cfg, ChatBackend& chat, const std::filesystem::path& dir);

struct TrainOutput {
  TrainingResult result;
  std::filesystem::path final_checkpoint;
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path reward_curve;
};
TrainOutput run_train(const RunConfig& cfg, ChatBackend& chat, ProcessRewardModel& prm,
                      const std::filesystem::path& dir);

struct EvalOutput {
  RunReport report;
  std::filesystem::path report_path;
};
// Throws ConfigError when the checkpoint's widths differ from cfg.trainer.widths.
std::unique_ptr<Policy> make_policy(const RunConfig& cfg);
EvalOutput run_eval(const RunConfig& cfg, ChatBackend& chat, const std::filesystem::path& dir);

struct SynthSeedResult {
  std::uint64_t seed = 0;
  double greedy = 0.0;
  double optimal = 0.0;
  double ratio = 0.0;
  bool pass = false;
};
struct SynthVerdict {
  std::vector<SynthSeedResult> seeds;
  int passing = 0;
  bool pass = false;
  nlohmann::json to_json() const;
};
SynthVerdict run_synth(const RunConfig& cfg);

}  // namespace thoughtnav

#endif  // THOUGHTNAV_PIPELINE_H_
