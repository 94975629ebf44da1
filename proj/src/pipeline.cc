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

#include "thoughtnav/pipeline.h"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thoughtnav/checkpoint.h"
#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("config '{}' must be an object", name_));
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("config '{}.{}': {}", name_, key, e.what()));
    }
  }

  const nlohmann::json* child(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ConfigError(fmt::format("unknown config key '{}.{}'", name_, it.key()));
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> used_;
};

nlohmann::json retry_json(const RetryPolicy& r) {
  return {{"max_attempts", r.max_attempts},
          {"backoff_ms", r.backoff_base.count()},
          {"backoff_multiplier", r.backoff_multiplier}};
}

void merge_retry(RetryPolicy& r, const nlohmann::json& j, const std::string& name) {
  Section s(j, name);
  std::int64_t ms = r.backoff_base.count();
  s.get("max_attempts", r.max_attempts);
  s.get("backoff_ms", ms);
  s.get("backoff_multiplier", r.backoff_multiplier);
  s.finish();
  r.backoff_base = std::chrono::milliseconds(ms);
}

nlohmann::json blocks_json(ActionMask m) {
  nlohmann::json out = nlohmann::json::array();
  for (ActionKind a : m.members()) out.push_back(std::string(action_name(a)));
  return out;
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << '\n';
}

}  // namespace

void RunConfig::finalize() {
  trainer.seed = seed;
  eval.seed = seed;
  env.temperature = chat.temperature;
  env.max_tokens = chat.max_tokens;
  env.model = chat.model;
  trainer.validate();
  env.validate();
  if (eval.trials < 1) throw ConfigError("eval.trials must be >= 1");
  if (eval.workers < 1) throw ConfigError("eval.workers must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (max_consecutive_failures < 0) throw ConfigError("max_consecutive_failures must be >= 0");
  if (chat.max_in_flight < 1) throw ConfigError("chat.max_in_flight must be >= 1");
  if (chat.retry.max_attempts < 1 || prm.retry.max_attempts < 1) {
    throw ConfigError("retry.max_attempts must be >= 1");
  }
  if (synth.seeds < 1 || synth.min_passing < 0 || synth.min_passing > synth.seeds) {
    throw ConfigError("synth needs seeds >= 1 and 0 <= min_passing <= seeds");
  }
  if (policy != "navigator" && policy != "fixed-sequence" && policy != "random") {
    throw ConfigError(fmt::format("unknown policy '{}'", policy));
  }
}

nlohmann::json to_json(const RunConfig& c) {
  const TrainerConfig& t = c.trainer;
  return {
      {"seed", c.seed},
      {"dataset", c.dataset},
      {"output_dir", c.output_dir},
      {"run_dir", c.run_dir},
      {"checkpoint", c.checkpoint},
      {"policy", c.policy},
      {"checkpoint_every", c.checkpoint_every},
      {"max_consecutive_failures", c.max_consecutive_failures},
      {"report_timing", c.report_timing},
      {"chat",
       {{"script", c.chat_script},
        {"base_url", c.chat.base_url},
        {"model", c.chat.model},
        {"temperature", c.chat.temperature},
        {"max_tokens", c.chat.max_tokens},
        {"timeout_s", c.chat.timeout.count()},
        {"retry", retry_json(c.chat.retry)},
        {"api_key_env", c.chat.api_key_env},
        {"max_in_flight", c.chat.max_in_flight}}},
      {"prm",
       {{"script", c.prm_script},
        {"url", c.prm.url},
        {"timeout_s", c.prm.timeout.count()},
        {"retry", retry_json(c.prm.retry)},
        {"api_key_env", c.prm.api_key_env}}},
      {"trainer",
       {{"gamma", t.gamma},
        {"episodes", t.episodes},
        {"batch_size", t.batch_size},
        {"target_sync_interval", t.target_sync_interval},
        {"learning_rate", t.base_lr},
        {"lr_decay", t.lr_decay},
        {"lr_decay_every", t.lr_decay_every},
        {"buffer_size", t.buffer_capacity},
        {"epsilon_start", t.epsilon_start},
        {"epsilon_min", t.epsilon_min},
        {"epsilon_decay", t.epsilon_decay},
        {"hidden", {t.widths.hidden1, t.widths.hidden2}},
        {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}}}}},
      {"env",
       {{"max_actions", c.env.max_actions},
        {"enabled_blocks", blocks_json(c.env.enabled_blocks)},
        {"self_eval_retry", c.env.self_eval_retry},
        {"max_subtasks", c.env.max_subtasks}}},
      {"eval",
       {{"trials", c.eval.trials},
        {"workers", c.eval.workers},
        {"keep_transcripts", c.eval.keep_transcripts}}},
      {"synth",
       {{"n_states", c.synth.spec.n_states},
        {"sharpness", c.synth.spec.sharpness},
        {"horizon", c.synth.spec.horizon},
        {"answer_fraction", c.synth.spec.answer_fraction},
        {"mdp_seed", c.synth.mdp_seed},
        {"seeds", c.synth.seeds},
        {"threshold", c.synth.threshold},
        {"min_passing", c.synth.min_passing}}},
  };
}

void merge_json(RunConfig& c, const nlohmann::json& j) {
  Section top(j, "config");
  top.get("seed", c.seed);
  top.get("dataset", c.dataset);
  top.get("output_dir", c.output_dir);
  top.get("run_dir", c.run_dir);
  top.get("checkpoint", c.checkpoint);
  top.get("policy", c.policy);
  top.get("checkpoint_every", c.checkpoint_every);
  top.get("max_consecutive_failures", c.max_consecutive_failures);
  top.get("report_timing", c.report_timing);

  if (const auto* cj = top.child("chat")) {
    Section s(*cj, "chat");
    std::int64_t timeout = c.chat.timeout.count();
    s.get("script", c.chat_script);
    s.get("base_url", c.chat.base_url);
    s.get("model", c.chat.model);
    s.get("temperature", c.chat.temperature);
    s.get("max_tokens", c.chat.max_tokens);
    s.get("timeout_s", timeout);
    s.get("api_key_env", c.chat.api_key_env);
    s.get("max_in_flight", c.chat.max_in_flight);
    if (const auto* r = s.child("retry")) merge_retry(c.chat.retry, *r, "chat.retry");
    s.finish();
    c.chat.timeout = std::chrono::seconds(timeout);
  }
  if (const auto* pj = top.child("prm")) {
    Section s(*pj, "prm");
    std::int64_t timeout = c.prm.timeout.count();
    s.get("script", c.prm_script);
    s.get("url", c.prm.url);
    s.get("timeout_s", timeout);
    s.get("api_key_env", c.prm.api_key_env);
    if (const auto* r = s.child("retry")) merge_retry(c.prm.retry, *r, "prm.retry");
    s.finish();
    c.prm.timeout = std::chrono::seconds(timeout);
  }
  if (const auto* tj = top.child("trainer")) {
    Section s(*tj, "trainer");
    TrainerConfig& t = c.trainer;
    s.get("gamma", t.gamma);
    s.get("episodes", t.episodes);
    s.get("batch_size", t.batch_size);
    s.get("target_sync_interval", t.target_sync_interval);
    s.get("learning_rate", t.base_lr);
    s.get("lr_decay", t.lr_decay);
    s.get("lr_decay_every", t.lr_decay_every);
    s.get("buffer_size", t.buffer_capacity);
    s.get("epsilon_start", t.epsilon_start);
    s.get("epsilon_min", t.epsilon_min);
    s.get("epsilon_decay", t.epsilon_decay);
    std::vector<int> hidden{t.widths.hidden1, t.widths.hidden2};
    s.get("hidden", hidden);
    if (hidden.size() != 2) throw ConfigError("trainer.hidden must list two widths");
    t.widths = {hidden[0], hidden[1]};
    if (const auto* aj = s.child("adam")) {
      Section a(*aj, "trainer.adam");
      a.get("beta1", t.adam.beta1);
      a.get("beta2", t.adam.beta2);
      a.get("epsilon", t.adam.epsilon);
      a.finish();
    }
    s.finish();
  }
  if (const auto* ej = top.child("env")) {
    Section s(*ej, "env");
    s.get("max_actions", c.env.max_actions);
    s.get("self_eval_retry", c.env.self_eval_retry);
    s.get("max_subtasks", c.env.max_subtasks);
    std::vector<std::string> blocks;
    s.get("enabled_blocks", blocks);
    if (ej->contains("enabled_blocks")) {
      ActionMask m;
      for (const std::string& b : blocks) {
        try {
          m.insert(action_from_name(b));
        } catch (const Error& e) {
          throw ConfigError(fmt::format("env.enabled_blocks: {}", e.what()));
        }
      }
      c.env.enabled_blocks = m;
    }
    s.finish();
  }
  if (const auto* vj = top.child("eval")) {
    Section s(*vj, "eval");
    s.get("trials", c.eval.trials);
    s.get("workers", c.eval.workers);
    s.get("keep_transcripts", c.eval.keep_transcripts);
    s.finish();
  }
  if (const auto* sj = top.child("synth")) {
    Section s(*sj, "synth");
    s.get("n_states", c.synth.spec.n_states);
    s.get("sharpness", c.synth.spec.sharpness);
    s.get("horizon", c.synth.spec.horizon);
    s.get("answer_fraction", c.synth.spec.answer_fraction);
    s.get("mdp_seed", c.synth.mdp_seed);
    s.get("seeds", c.synth.seeds);
    s.get("threshold", c.synth.threshold);
    s.get("min_passing", c.synth.min_passing);
    s.finish();
  }
  top.finish();
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  merge_json(base, j);
  return base;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

void apply_env(RunConfig& cfg, const EnvLookup& lookup) {
  if (auto v = lookup("THOUGHTNAV_BASE_URL")) cfg.chat.base_url = *v;
  if (auto v = lookup("THOUGHTNAV_MODEL")) cfg.chat.model = *v;
  if (auto v = lookup("THOUGHTNAV_PRM_URL")) cfg.prm.url = *v;
  if (auto v = lookup("THOUGHTNAV_OUTPUT_DIR")) cfg.output_dir = *v;
  if (auto v = lookup("THOUGHTNAV_SEED")) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("THOUGHTNAV_SEED is not an integer: '{}'", *v));
    }
  }
}

std::filesystem::path resolve_run_dir(const RunConfig& cfg) {
  if (!cfg.run_dir.empty()) return cfg.run_dir;
  const std::filesystem::path base = std::filesystem::path(cfg.output_dir) /
                                     fmt::format("{}-seed{}", timestamp(), cfg.seed);
  std::filesystem::path dir = base;
  for (int k = 2; std::filesystem::exists(dir); ++k) {
    dir = base.string() + fmt::format("-{}", k);
  }
  return dir;
}

void write_resolved_config(const std::filesystem::path& dir, const RunConfig& cfg) {
  std::filesystem::create_directories(dir);
  write_json(dir / "resolved_config.json", to_json(cfg));
}

std::unique_ptr<ChatBackend> make_chat_backend(const RunConfig& cfg) {
  if (!cfg.chat_script.empty()) return ScriptedChatBackend::from_file(cfg.chat_script);
  return std::make_unique<RetryingChatBackend>(std::make_shared<OpenAiChatBackend>(cfg.chat),
                                               cfg.chat.retry);
}

std::unique_ptr<ProcessRewardModel> make_prm(const RunConfig& cfg) {
  if (!cfg.prm_script.empty()) return ScriptedPrm::from_file(cfg.prm_script);
  return std::make_unique<HttpPrm>(cfg.prm);
}

MineOutput run_mine(const RunConfig& cfg, ChatBackend& chat, const std::filesystem::path& dir) {
  if (cfg.dataset.empty()) throw ConfigError("mining needs a dataset");
  const std::vector<QuestionRecord> dataset = load_dataset(cfg.dataset);
  write_resolved_config(dir, cfg);
  MineOutput out;
  out.result = mine_hard(dataset, chat,
                         {cfg.chat.model, cfg.chat.temperature, cfg.chat.max_tokens});
  out.hard_set = dir / "hard.jsonl";
  write_dataset(out.hard_set, out.result.hard);

  nlohmann::json entries = nlohmann::json::array();
  for (const MiningEntry& e : out.result.entries) {
    static constexpr const char* kStatus[] = {"solved", "hard", "undetermined"};
    nlohmann::json ej = {{"id", e.id},
                         {"status", kStatus[static_cast<int>(e.status)]},
                         {"extracted", e.extracted ? nlohmann::json(*e.extracted) : nlohmann::json(nullptr)},
                         {"tokens", {{"input", e.usage.input}, {"output", e.usage.output}}}};
    if (!e.error.empty()) ej["error"] = e.error;
    entries.push_back(std::move(ej));
  }
  nlohmann::json summary = out.result.summary();
  summary["questions"] = std::move(entries);
  write_json(dir / "mining_summary.json", summary);
  return out;
}

TrainOutput run_train(const RunConfig& cfg, ChatBackend& chat, ProcessRewardModel& prm,
                      const std::filesystem::path& dir) {
  if (cfg.dataset.empty()) throw ConfigError("training needs a dataset (the hard set)");
  auto questions = std::make_shared<const std::vector<QuestionRecord>>(load_dataset(cfg.dataset));
  if (questions->empty() && cfg.trainer.episodes > 0) {
    throw DatasetError(fmt::format("{} holds no questions", cfg.dataset), 0);
  }
  write_resolved_config(dir, cfg);
  const std::filesystem::path ckpt_dir = dir / "checkpoints";
  std::filesystem::create_directories(ckpt_dir);

  const ReasoningEnv env(chat, &prm, cfg.env);
  EnvFactory factory = [&env, questions]() -> std::unique_ptr<Environment> {
    return std::make_unique<ReasoningEpisodeEnv>(env, questions);
  };

  TrainOutput out;
  int consecutive_failures = 0;
  auto on_episode = [&](const EpisodeStats& s, const Navigator& online) {
    consecutive_failures = s.failed ? consecutive_failures + 1 : 0;
    if (cfg.max_consecutive_failures > 0 && consecutive_failures >= cfg.max_consecutive_failures) {
      throw StepFailure(fmt::format("{} consecutive episodes failed; last: {}",
                                    consecutive_failures, s.failure));
    }
    const std::int64_t done = s.episode + 1;
    if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) {
      const auto path = ckpt_dir / fmt::format("ckpt-{:06d}.bin", done);
      write_checkpoint_file(path, online, {cfg.seed, static_cast<std::uint64_t>(done)});
      out.checkpoints.push_back(path);
    }
  };
  out.result = run_training(factory, cfg.trainer, on_episode);

  out.final_checkpoint = ckpt_dir / "final.bin";
  write_checkpoint_file(out.final_checkpoint, out.result.online, out.result.meta);
  out.reward_curve = dir / "reward_curve.tsv";
  write_reward_curve(out.reward_curve, out.result.stats);

  std::size_t failed = 0;
  for (const EpisodeStats& s : out.result.stats) failed += s.failed ? 1 : 0;
  write_json(dir / "training_summary.json",
             {{"episodes", out.result.stats.size()},
              {"failed_episodes", failed},
              {"global_steps", out.result.global_steps},
              {"gradient_updates", out.result.gradient_updates}});
  return out;
}

std::unique_ptr<Policy> make_policy(const RunConfig& cfg) {
  if (cfg.policy == "fixed-sequence") return baseline_policy(BaselineKind::kFixedSequence);
  if (cfg.policy == "random") return baseline_policy(BaselineKind::kRandom);
  if (cfg.policy != "navigator") throw ConfigError(fmt::format("unknown policy '{}'", cfg.policy));
  if (cfg.checkpoint.empty()) throw ConfigError("the navigator policy needs a checkpoint");
  Checkpoint ckpt = read_checkpoint_file(cfg.checkpoint);
  const NetWidths w = ckpt.net.widths();
  if (w != cfg.trainer.widths) {
    throw ConfigError(fmt::format("checkpoint widths ({},{}) differ from configured ({},{})",
                                  w.hidden1, w.hidden2, cfg.trainer.widths.hidden1,
                                  cfg.trainer.widths.hidden2));
  }
  return std::make_unique<NavigatorPolicy>(std::move(ckpt.net));
}

EvalOutput run_eval(const RunConfig& cfg, ChatBackend& chat, const std::filesystem::path& dir) {
  if (cfg.dataset.empty()) throw ConfigError("evaluation needs a dataset");
  const std::unique_ptr<Policy> policy = make_policy(cfg);
  const std::vector<QuestionRecord> dataset = load_dataset(cfg.dataset);
  write_resolved_config(dir, cfg);
  const ReasoningEnv env(chat, nullptr, cfg.env);
  EvalOutput out;
  out.report = evaluate(*policy, dataset, cfg.eval, env);
  out.report_path = dir / "report.json";
  write_json(out.report_path, out.report.to_json(cfg.report_timing));
  return out;
}

nlohmann::json SynthVerdict::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const SynthSeedResult& r : seeds) {
    rows.push_back({{"seed", r.seed},
                    {"greedy_return", r.greedy},
                    {"optimal_return", r.optimal},
                    {"ratio", r.ratio},
                    {"pass", r.pass}});
  }
  return {{"seeds", rows}, {"passing", passing}, {"pass", pass}};
}

SynthVerdict run_synth(const RunConfig& cfg) {
  auto mdp = std::make_shared<const ScriptedMdp>(make_scripted(cfg.synth.mdp_seed, cfg.synth.spec));
  const double optimal = optimal_return(*mdp, cfg.trainer.gamma).optimal_return;
  SynthVerdict v;
  for (int k = 0; k < cfg.synth.seeds; ++k) {
    TrainerConfig t = cfg.trainer;
    t.seed = cfg.seed + static_cast<std::uint64_t>(k);
    const TrainingResult trained = run_training(synthetic_factory(mdp), t);
    SynthSeedResult r;
    r.seed = t.seed;
    r.optimal = optimal;
    r.greedy = greedy_return(*mdp, trained.online, t.gamma);
    r.ratio = optimal > 0.0 ? r.greedy / optimal : (r.greedy >= optimal ? 1.0 : 0.0);
    r.pass = r.ratio >= cfg.synth.threshold;
    v.passing += r.pass ? 1 : 0;
    v.seeds.push_back(r);
  }
  v.pass = v.passing >= cfg.synth.min_passing;
  return v;
}

}  // namespace thoughtnav
