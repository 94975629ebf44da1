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

#include "thoughtnav/evalkit.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

DatasetError line_error(const std::string& what, std::size_t line) {
  return DatasetError(fmt::format("line {}: {}", line, what), line);
}

std::string required_text(const nlohmann::json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw line_error(fmt::format("missing field '{}'", key), line);
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  if (it->is_number()) return it->dump();
  throw line_error(fmt::format("field '{}' must be a string", key), line);
}

nlohmann::json usage_json(const TokenUsage& u) {
  return {{"input", u.input}, {"output", u.output}};
}

nlohmann::json optional_text(const std::optional<std::string>& s) {
  return s ? nlohmann::json(*s) : nlohmann::json(nullptr);
}

}  // namespace

std::vector<QuestionRecord> parse_dataset(std::istream& in) {
  std::vector<QuestionRecord> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw line_error(fmt::format("invalid JSON: {}", e.what()), line);
    }
    if (!j.is_object()) throw line_error("record must be an object", line);

    QuestionRecord r;
    r.id = required_text(j, "id", line);
    r.question = required_text(j, "question", line);
    r.answer = required_text(j, "answer", line);
    const std::string kind = required_text(j, "kind", line);
    if (r.id.empty()) throw line_error("empty id", line);
    if (r.question.empty()) throw line_error("empty question", line);
    if (r.answer.empty()) throw line_error("empty gold answer", line);
    try {
      r.kind = dataset_kind_from_name(kind);
    } catch (const Error& e) {
      throw line_error(e.what(), line);
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() != "id" && it.key() != "question" && it.key() != "answer" &&
          it.key() != "kind") {
        r.metadata[it.key()] = it.value();
      }
    }
    auto [pos, fresh] = seen.emplace(r.id, line);
    if (!fresh) {
      throw line_error(
          fmt::format("duplicate id '{}' (first seen on line {})", r.id, pos->second), line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(fmt::format("cannot read dataset {}", path.string()), 0);
  try {
    return parse_dataset(in);
  } catch (const DatasetError& e) {
    throw DatasetError(fmt::format("{}: {}", path.string(), e.what()), e.line());
  }
}

nlohmann::json record_to_json(const QuestionRecord& r) {
  nlohmann::json j = r.metadata.is_object() ? r.metadata : nlohmann::json::object();
  j["id"] = r.id;
  j["question"] = r.question;
  j["answer"] = r.answer;
  j["kind"] = std::string(dataset_kind_name(r.kind));
  return j;
}

void write_dataset(std::ostream& out, std::span<const QuestionRecord> records) {
  for (const QuestionRecord& r : records) out << record_to_json(r).dump() << '\n';
}

void write_dataset(const std::filesystem::path& path, std::span<const QuestionRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  write_dataset(out, records);
}

double MiningResult::proportion() const {
  return total == 0 ? 0.0 : static_cast<double>(hard.size()) / static_cast<double>(total);
}

nlohmann::json MiningResult::summary() const {
  return {{"Total", total},
          {"Hard", hard.size()},
          {"Proportion", proportion()},
          {"Undetermined", undetermined}};
}

MiningResult mine_hard(std::span<const QuestionRecord> dataset, ChatBackend& chat,
                       const MiningConfig& cfg) {
  MiningResult result;
  result.total = dataset.size();
  for (const QuestionRecord& q : dataset) {
    MiningEntry entry;
    entry.id = q.id;
    ReasoningContext ctx;
    ctx.problem = q.question;
    ctx.dataset_kind = q.kind;
    ChatRequest req;
    req.user = render_prompt(direct_prompt(q.kind), ctx, {});
    req.model = cfg.model;
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    try {
      ChatExchange ex = chat.complete(req);
      entry.usage = ex.usage;
      entry.extracted = extract_answer(ex.response, q.kind);
      const bool solved = entry.extracted && answers_equivalent(*entry.extracted, q.answer, q.kind);
      entry.status = solved ? MiningStatus::kSolved : MiningStatus::kHard;
    } catch (const GatewayError& e) {
      if (is_fatal(e)) throw;
      spdlog::warn("question {} undetermined: {}", q.id, e.what());
      entry.status = MiningStatus::kUndetermined;
      entry.error = e.what();
      ++result.undetermined;
    }
    if (entry.status == MiningStatus::kHard) result.hard.push_back(q);
    result.entries.push_back(std::move(entry));
  }
  return result;
}

ActionKind NavigatorPolicy::choose(const ReasoningContext&, const StateVector& state,
                                   const ActionMask& legal, Rng&) const {
  return masked_argmax(forward(net_, state), legal);
}

ActionKind FixedSequencePolicy::choose(const ReasoningContext& ctx, const StateVector&,
                                       const ActionMask& legal, Rng&) const {
  static constexpr ActionKind kSchedule[] = {ActionKind::kDecompose, ActionKind::kReasonOneStep,
                                             ActionKind::kRefine};
  const int t = ctx.actions_taken();
  if (t < 3 && legal.contains(kSchedule[t])) return kSchedule[t];
  if (t < 3 && legal.contains(ActionKind::kReasonOneStep)) return ActionKind::kReasonOneStep;
  return ActionKind::kTerminate;
}

ActionKind RandomPolicy::choose(const ReasoningContext&, const StateVector&,
                                const ActionMask& legal, Rng& rng) const {
  const std::vector<ActionKind> options = legal.members();
  std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
  return options[pick(rng)];
}

std::unique_ptr<Policy> baseline_policy(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kFixedSequence:
      return std::make_unique<FixedSequencePolicy>();
    case BaselineKind::kRandom:
      return std::make_unique<RandomPolicy>();
  }
  throw InputError("unknown baseline");
}

TrialRecord rollout(const ReasoningEnv& env, const Policy& policy, const QuestionRecord& question,
                    Rng& rng) {
  TrialRecord trial;
  try {
    ResetOutcome start = env.reset(question);
    trial.usage += start.usage;
    for (CallRecord& c : start.transcript) trial.transcript.push_back(std::move(c));
    ReasoningContext ctx = std::move(start.context);
    StateVector state = start.state;
    for (bool done = false; !done;) {
      const ActionMask legal = legal_actions(ctx, env.config());
      const ActionKind a = policy.choose(ctx, state, legal, rng);
      StepOutcome out = env.step(ctx, state, a);
      trial.actions.push_back(out.executed);
      trial.usage += out.usage;
      for (CallRecord& c : out.transcript) trial.transcript.push_back(std::move(c));
      done = out.done;
      if (done) trial.answer = out.final_answer;
      ctx = std::move(out.context);
      state = out.state;
    }
  } catch (const Error& e) {
    if (is_fatal(e)) throw;
    trial.failed = true;
    trial.error = e.what();
    spdlog::warn("trial on {} failed: {}", question.id, e.what());
  }
  return trial;
}

namespace {

QuestionResult evaluate_question(const Policy& policy, const QuestionRecord& q, std::size_t index,
                                 const EvalConfig& cfg, const ReasoningEnv& env) {
  const auto start = std::chrono::steady_clock::now();
  QuestionResult r;
  r.id = q.id;
  r.gold = q.answer;
  r.kind = q.kind;
  std::vector<std::string> answers;
  for (int t = 0; t < cfg.trials; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(t)};
    Rng rng(seq);
    TrialRecord trial = rollout(env, policy, q, rng);
    if (!cfg.keep_transcripts) trial.transcript.clear();
    r.usage += trial.usage;
    if (trial.answer) answers.push_back(*trial.answer);
    r.trials.push_back(std::move(trial));
  }
  if (!answers.empty()) {
    r.vote = majority_vote(answers, q.kind, splitmix64(cfg.seed ^ splitmix64(index)));
    r.final_answer = r.vote->winner;
    r.correct = answers_equivalent(r.vote->winner, q.answer, q.kind);
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

RunReport evaluate(const Policy& policy, std::span<const QuestionRecord> dataset,
                   const EvalConfig& cfg, const ReasoningEnv& env) {
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  RunReport report;
  report.policy = policy.name();
  report.trials = cfg.trials;
  report.seed = cfg.seed;
  report.questions.resize(dataset.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < dataset.size(); i = next++) {
      try {
        report.questions[i] = evaluate_question(policy, dataset[i], i, cfg, env);
      } catch (...) {
        std::lock_guard lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
        next = dataset.size();
      }
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), std::max<std::size_t>(dataset.size(), 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  for (const QuestionResult& q : report.questions) {
    report.correct += q.correct ? 1 : 0;
    report.usage += q.usage;
  }
  report.accuracy = dataset.empty() ? 0.0
                                    : static_cast<double>(report.correct) /
                                          static_cast<double>(dataset.size());
  audit_report(report);
  return report;
}

void audit_report(const RunReport& report) {
  std::size_t correct = 0;
  TokenUsage usage;
  for (const QuestionResult& q : report.questions) {
    TokenUsage trial_usage;
    for (const TrialRecord& t : q.trials) trial_usage += t.usage;
    if (trial_usage != q.usage) {
      throw VerificationError(fmt::format("token total for {} disagrees with its trials", q.id));
    }
    const bool recount = q.final_answer && answers_equivalent(*q.final_answer, q.gold, q.kind);
    if (recount != q.correct) {
      throw VerificationError(fmt::format("correct flag for {} disagrees with its answer", q.id));
    }
    correct += recount ? 1 : 0;
    usage += q.usage;
  }
  const double accuracy =
      report.questions.empty()
          ? 0.0
          : static_cast<double>(correct) / static_cast<double>(report.questions.size());
  if (correct != report.correct || accuracy != report.accuracy || usage != report.usage) {
    throw VerificationError("report aggregates disagree with the per-question records");
  }
}

nlohmann::json RunReport::to_json(bool include_timing) const {
  nlohmann::json qs = nlohmann::json::array();
  for (const QuestionResult& q : questions) {
    nlohmann::json trials_json = nlohmann::json::array();
    for (const TrialRecord& t : q.trials) {
      nlohmann::json actions = nlohmann::json::array();
      for (ActionKind a : t.actions) actions.push_back(std::string(action_name(a)));
      nlohmann::json tj = {{"actions", actions},
                           {"answer", optional_text(t.answer)},
                           {"tokens", usage_json(t.usage)}};
      if (t.failed) tj["error"] = t.error;
      if (!t.transcript.empty()) tj["transcript"] = transcript_to_json(t.transcript);
      trials_json.push_back(std::move(tj));
    }
    nlohmann::json qj = {{"id", q.id},
                         {"kind", std::string(dataset_kind_name(q.kind))},
                         {"gold", q.gold},
                         {"answer", optional_text(q.final_answer)},
                         {"correct", q.correct},
                         {"tokens", usage_json(q.usage)},
                         {"trials", trials_json}};
    if (q.vote) {
      qj["vote"] = {{"candidates", q.vote->candidates},
                    {"winner", q.vote->winner},
                    {"votes", q.vote->winner_votes},
                    {"tie_broken", q.vote->tie_broken},
                    {"seed", q.vote->seed}};
    }
    if (include_timing) qj["wall_seconds"] = q.wall_seconds;
    qs.push_back(std::move(qj));
  }
  return {{"policy", policy},
          {"trials", trials},
          {"seed", seed},
          {"total", questions.size()},
          {"correct", correct},
          {"accuracy", accuracy},
          {"tokens", usage_json(usage)},
          {"questions", qs}};
}

}  // namespace thoughtnav
