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

// Command-line front end: mine-hard, train, eval, synth-train, inspect.

#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "thoughtnav/checkpoint.h"
#include "thoughtnav/errors.h"
#include "thoughtnav/pipeline.h"

namespace tn = thoughtnav;

namespace {

int exit_code(tn::ErrorCategory c) {
  switch (c) {
    case tn::ErrorCategory::kInput: return 2;
    case tn::ErrorCategory::kConfig: return 3;
    case tn::ErrorCategory::kData: return 4;
    case tn::ErrorCategory::kGateway: return 5;
    case tn::ErrorCategory::kEnvironment: return 6;
    case tn::ErrorCategory::kVerification: return 7;
  }
  return 1;
}

// Flag values that override the config file only when given.
struct Flags {
  std::string config;
  std::string log_level = "info";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir, run_dir, chat_script, prm_script, base_url, model;
  std::optional<std::string> dataset, checkpoint, policy;
  std::optional<int> episodes, checkpoint_every, trials, workers, max_in_flight, max_actions;
  std::optional<int> seeds;
  std::optional<std::uint64_t> mdp_seed;
  std::optional<double> threshold, temperature;
  bool timing = false;
  bool transcripts = false;
  std::vector<std::string> blocks;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--output-dir", f.output_dir, "parent of per-run directories");
  cmd->add_option("--run-dir", f.run_dir, "exact run directory (skips the timestamped name)");
  cmd->add_option("--log-level", f.log_level, "trace|debug|info|warn|error|off");
}

void add_gateway(CLI::App* cmd, Flags& f) {
  cmd->add_option("--chat-script", f.chat_script, "scripted chat fixture (offline mode)");
  cmd->add_option("--base-url", f.base_url, "OpenAI-compatible endpoint");
  cmd->add_option("--model", f.model, "model identifier");
  cmd->add_option("--temperature", f.temperature, "sampling temperature");
  cmd->add_option("--max-in-flight", f.max_in_flight, "concurrent request limit");
}

void add_env(CLI::App* cmd, Flags& f) {
  cmd->add_option("--max-actions", f.max_actions, "action budget per question");
  cmd->add_option("--blocks", f.blocks, "enabled logic blocks, e.g. reason_one_step,refine,terminate")
      ->delimiter(',');
}

tn::RunConfig resolve(const Flags& f) {
  tn::RunConfig cfg;
  if (!f.config.empty()) cfg = tn::load_run_config(f.config);
  tn::apply_env(cfg, tn::process_env());
  if (f.seed) cfg.seed = *f.seed;
  if (f.output_dir) cfg.output_dir = *f.output_dir;
  if (f.run_dir) cfg.run_dir = *f.run_dir;
  if (f.chat_script) cfg.chat_script = *f.chat_script;
  if (f.prm_script) cfg.prm_script = *f.prm_script;
  if (f.base_url) cfg.chat.base_url = *f.base_url;
  if (f.model) cfg.chat.model = *f.model;
  if (f.temperature) cfg.chat.temperature = *f.temperature;
  if (f.max_in_flight) cfg.chat.max_in_flight = *f.max_in_flight;
  if (f.dataset) cfg.dataset = *f.dataset;
  if (f.checkpoint) cfg.checkpoint = *f.checkpoint;
  if (f.policy) cfg.policy = *f.policy;
  if (f.episodes) cfg.trainer.episodes = *f.episodes;
  if (f.checkpoint_every) cfg.checkpoint_every = *f.checkpoint_every;
  if (f.trials) cfg.eval.trials = *f.trials;
  if (f.workers) cfg.eval.workers = *f.workers;
  if (f.max_actions) cfg.env.max_actions = *f.max_actions;
  if (f.seeds) cfg.synth.seeds = *f.seeds;
  if (f.mdp_seed) cfg.synth.mdp_seed = *f.mdp_seed;
  if (f.threshold) cfg.synth.threshold = *f.threshold;
  if (f.timing) cfg.report_timing = true;
  if (f.transcripts) cfg.eval.keep_transcripts = true;
  if (!f.blocks.empty()) {
    tn::ActionMask m;
    for (const std::string& b : f.blocks) m.insert(tn::action_from_name(b));
    cfg.env.enabled_blocks = m;
  }
  cfg.finalize();
  return cfg;
}

int cmd_mine(const Flags& f) {
  const tn::RunConfig cfg = resolve(f);
  auto chat = tn::make_chat_backend(cfg);
  const auto dir = tn::resolve_run_dir(cfg);
  const tn::MineOutput out = tn::run_mine(cfg, *chat, dir);
  fmt::print("Total: {}\nHard: {}\nProportion: {:.2f}%\n", out.result.total,
             out.result.hard_count(), 100.0 * out.result.proportion());
  if (out.result.undetermined > 0) fmt::print("Undetermined: {}\n", out.result.undetermined);
  fmt::print("hard set: {}\n", out.hard_set.string());
  return 0;
}

int cmd_train(const Flags& f) {
  const tn::RunConfig cfg = resolve(f);
  auto chat = tn::make_chat_backend(cfg);
  auto prm = tn::make_prm(cfg);
  const auto dir = tn::resolve_run_dir(cfg);
  const tn::TrainOutput out = tn::run_train(cfg, *chat, *prm, dir);
  fmt::print("episodes: {}\nsteps: {}\ngradient updates: {}\ncheckpoint: {}\nreward curve: {}\n",
             out.result.stats.size(), out.result.global_steps, out.result.gradient_updates,
             out.final_checkpoint.string(), out.reward_curve.string());
  return 0;
}

int cmd_eval(const Flags& f) {
  const tn::RunConfig cfg = resolve(f);
  auto chat = tn::make_chat_backend(cfg);
  const auto dir = tn::resolve_run_dir(cfg);
  const tn::EvalOutput out = tn::run_eval(cfg, *chat, dir);
  const tn::RunReport& r = out.report;
  fmt::print("policy: {}\ncorrect: {}/{}\naccuracy: {:.4f}\ntokens: {} in, {} out\nreport: {}\n",
             r.policy, r.correct, r.questions.size(), r.accuracy, r.usage.input, r.usage.output,
             out.report_path.string());
  return 0;
}

int cmd_synth(const Flags& f) {
  const tn::RunConfig cfg = resolve(f);
  const tn::SynthVerdict v = tn::run_synth(cfg);
  for (const tn::SynthSeedResult& r : v.seeds) {
    fmt::print("seed {}: greedy {:.6f} optimal {:.6f} ratio {:.4f} {}\n", r.seed, r.greedy,
               r.optimal, r.ratio, r.pass ? "pass" : "fail");
  }
  fmt::print("{}/{} seeds reach ratio >= {} (need {}): {}\n", v.passing, v.seeds.size(),
             cfg.synth.threshold, cfg.synth.min_passing, v.pass ? "PASS" : "FAIL");
  if (f.run_dir || f.output_dir) {
    const auto dir = tn::resolve_run_dir(cfg);
    tn::write_resolved_config(dir, cfg);
    std::ofstream(dir / "synth_verdict.json") << v.to_json().dump(2) << '\n';
  }
  if (!v.pass) {
    std::fprintf(stderr, "error: synthetic convergence below threshold\n");
    return exit_code(tn::ErrorCategory::kVerification);
  }
  return 0;
}

int cmd_inspect(const std::string& path, const std::vector<int>& state) {
  const tn::Checkpoint ck = tn::read_checkpoint_file(path);
  const tn::NetWidths w = ck.net.widths();
  fmt::print("checkpoint: {}\nversion: {}\nwidths: {} x {}\nparameters: {}\nepisodes: {}\nseed: {}\n",
             path, ck.version, w.hidden1, w.hidden2, tn::parameter_count(w), ck.meta.episodes,
             ck.meta.seed);
  if (!state.empty()) {
    if (state.size() != tn::kNumAspects) {
      throw tn::InputError(fmt::format("--state needs {} scores", tn::kNumAspects));
    }
    std::array<int, tn::kNumAspects> a{};
    std::copy(state.begin(), state.end(), a.begin());
    const tn::StateVector s(a);
    const Eigen::VectorXd q = tn::forward(ck.net, s);
    fmt::print("q-values for [{}]:\n", fmt::join(state, ","));
    for (tn::ActionKind k : tn::kAllActions) {
      fmt::print("  {:<16} {:.6f}\n", tn::action_name(k), q(tn::action_index(k)));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thoughtnav: train and evaluate a reasoning-block navigator"};
  app.require_subcommand(1);
  Flags f;

  auto* mine = app.add_subcommand("mine-hard", "keep questions the reference model gets wrong");
  add_common(mine, f);
  add_gateway(mine, f);
  mine->add_option("--dataset", f.dataset, "JSONL dataset")->required();

  auto* train = app.add_subcommand("train", "train the navigator on a hard set");
  add_common(train, f);
  add_gateway(train, f);
  add_env(train, f);
  train->add_option("--dataset", f.dataset, "JSONL hard set");
  train->add_option("--prm-script", f.prm_script, "scripted PRM fixture (offline mode)");
  train->add_option("--episodes", f.episodes, "training episodes");
  train->add_option("--checkpoint-every", f.checkpoint_every, "episodes between checkpoints");

  auto* eval = app.add_subcommand("eval", "evaluate a navigator or baseline policy");
  add_common(eval, f);
  add_gateway(eval, f);
  add_env(eval, f);
  eval->add_option("--dataset", f.dataset, "JSONL dataset");
  eval->add_option("--checkpoint", f.checkpoint, "navigator checkpoint");
  eval->add_option("--policy", f.policy, "navigator|fixed-sequence|random");
  eval->add_option("--trials", f.trials, "self-consistency trials per question");
  eval->add_option("--workers", f.workers, "questions evaluated concurrently");
  eval->add_flag("--timing", f.timing, "include wall-clock times in the report");
  eval->add_flag("--transcripts", f.transcripts, "include every LLM call in the report");

  auto* synth = app.add_subcommand("synth-train", "train on the planted synthetic MDP");
  add_common(synth, f);
  synth->add_option("--episodes", f.episodes, "training episodes per seed");
  synth->add_option("--seeds", f.seeds, "number of training seeds");
  synth->add_option("--mdp-seed", f.mdp_seed, "generator seed for the MDP");
  synth->add_option("--threshold", f.threshold, "required greedy/optimal ratio");

  std::string ckpt_path;
  std::vector<int> state;
  auto* inspect = app.add_subcommand("inspect", "summarize a checkpoint");
  inspect->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
  inspect->add_option("--state", state, "seven scores, e.g. 3,3,3,3,3,3,3")->delimiter(',');
  inspect->add_option("--log-level", f.log_level, "trace|debug|info|warn|error|off");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  spdlog::set_default_logger(spdlog::stderr_color_st("thoughtnav"));
  spdlog::set_level(spdlog::level::from_str(f.log_level));
  try {
    if (mine->parsed()) return cmd_mine(f);
    if (train->parsed()) return cmd_train(f);
    if (eval->parsed()) return cmd_eval(f);
    if (synth->parsed()) return cmd_synth(f);
    if (inspect->parsed()) return cmd_inspect(ckpt_path, state);
  } catch (const tn::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
