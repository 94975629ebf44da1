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

// Gateway, reward model, reasoning environment, evaluation and run config.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "thoughtnav/errors.h"
#include "thoughtnav/evalkit.h"
#include "thoughtnav/gateway.h"
#include "thoughtnav/pipeline.h"
#include "thoughtnav/prm.h"
#include "thoughtnav/reasoning_env.h"

// Last: <resolv.h> defines a _res macro that collides with Eigen.
#define CPPHTTPLIB_OPENSSL_SUPPORT  // must match the library's translation unit
#include <httplib.h>

namespace thoughtnav {
namespace {

using namespace std::chrono_literals;

std::string eval_text(int s) {
  std::string out;
  for (const char* l : {"A1", "A2", "A3", "B1", "B2", "C1", "C2"}) {
    out += fmt::format("{} score={} reason=ok\n", l, s);
  }
  return out;
}

ScriptRule rule(std::string name, std::string needle, std::vector<std::string> responses) {
  ScriptRule r;
  r.name = std::move(name);
  r.contains = {std::move(needle)};
  r.responses = std::move(responses);
  return r;
}

// One rule per prompt family, self-evaluation first because its prompt embeds
// the reasoning text of every other block.
std::vector<ScriptRule> block_rules(std::string terminate = "The answer is 42") {
  return {rule("eval", "Please evaluate the current step", {eval_text(2)}),
          rule("split", "Please decompose the current task", {"### Subtask1: A\n### Subtask2: B"}),
          rule("subtask", "Please conduct the following Subtask", {"subtask result"}),
          rule("summary", "clear and concise summary", {"Summary of A and B"}),
          rule("plans", "propose three different", {"### Plan1: p\n### Plan2: q\n### Plan3: r"}),
          rule("choose", "which one is most promising", {"The most promising plan is Plan2: short"}),
          rule("execute", "decided on the most promising plan", {"Executed plan two"}),
          rule("refine", "check and refine", {"Refined step"}),
          rule("reason", "reason exactly ONE more step", {"One more step"}),
          rule("terminate", "Please generate the answer for the problem", {std::move(terminate)})};
}

QuestionRecord question(std::string id = "q1", std::string text = "What is 6 * 7?",
                        std::string gold = "42") {
  QuestionRecord q;
  q.id = std::move(id);
  q.question = std::move(text);
  q.answer = std::move(gold);
  return q;
}

ChatRequest request(std::string user) {
  ChatRequest r;
  r.user = std::move(user);
  return r;
}

// --- gateway ----------------------------------------------------------------

TEST(Gateway, UsageTotals) {
  std::vector<ChatExchange> calls(2);
  calls[0].usage = {10, 5};
  calls[1].usage = {7, 3};
  EXPECT_EQ(usage_totals(calls), (TokenUsage{17, 8}));
  EXPECT_EQ(usage_totals({}), TokenUsage{});
}

TEST(Gateway, ScriptedRulesAndCycling) {
  ScriptedChatBackend chat({rule("a", "alpha", {"one", "two"}), rule("b", "beta", {"B"})}, false,
                           "fallback");
  EXPECT_EQ(chat.complete(request("alpha")).response, "one");
  EXPECT_EQ(chat.complete(request("alpha")).response, "two");
  EXPECT_EQ(chat.complete(request("alpha")).response, "one");
  EXPECT_EQ(chat.complete(request("beta")).response, "B");
  EXPECT_EQ(chat.complete(request("gamma")).response, "fallback");
  EXPECT_EQ(chat.call_count(), 5u);
  chat.reset();
  EXPECT_EQ(chat.complete(request("alpha")).response, "one");
}

TEST(Gateway, StrictScriptRejectsUnmatchedAndAmbiguous) {
  ScriptedChatBackend chat({rule("a", "alpha", {"A"}), rule("ab", "alp", {"AB"})}, true);
  EXPECT_THROW(chat.complete(request("nothing")), UnmatchedPromptError);
  EXPECT_THROW(chat.complete(request("alpha")), UnmatchedPromptError);
  EXPECT_EQ(chat.complete(request("alp")).response, "AB");
}

TEST(Gateway, ScriptedIsAFunctionOfThePrompt) {
  auto a = ScriptedChatBackend::from_json(nlohmann::json::parse(
      R"({"rules":[{"contains":"x","response":"X"},{"pattern":"^y\\d$","response":"Y"}]})"));
  auto b = ScriptedChatBackend::from_json(nlohmann::json::parse(
      R"({"rules":[{"contains":"x","response":"X"},{"pattern":"^y\\d$","response":"Y"}]})"));
  for (const char* p : {"x1", "y2", "x3", "y4"}) {
    EXPECT_EQ(a->complete(request(p)).response, b->complete(request(p)).response);
  }
  EXPECT_EQ(a->complete(request("y7")).response, "Y");
  EXPECT_THROW(ScriptedChatBackend::from_json(nlohmann::json::parse(
                   R"({"rules":[{"pattern":"(","response":"Y"}]})")),
               InputError);
}

class FlakyChat : public ChatBackend {
 public:
  FlakyChat(int failures, bool transient) : failures_(failures), transient_(transient) {}
  ChatExchange complete(const ChatRequest& r) override {
    ++calls;
    if (calls <= failures_) {
      if (transient_) throw TransientError("HTTP 429");
      throw RequestRejectedError("HTTP 400");
    }
    ChatExchange ex;
    ex.request = r;
    ex.response = "ok";
    return ex;
  }
  int calls = 0;

 private:
  int failures_;
  bool transient_;
};

TEST(Gateway, RetrySucceedsOnThirdAttempt) {
  auto inner = std::make_shared<FlakyChat>(2, true);
  std::vector<std::chrono::milliseconds> sleeps;
  RetryingChatBackend chat(inner, {3, 100ms, 2.0},
                           [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  const ChatExchange ex = chat.complete(request("q"));
  EXPECT_EQ(ex.response, "ok");
  EXPECT_EQ(ex.attempts, 3);
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{100ms, 200ms}));
}

TEST(Gateway, RetryBudgetExhausted) {
  auto inner = std::make_shared<FlakyChat>(10, true);
  RetryingChatBackend chat(inner, {3, 1ms, 2.0}, [](auto) {});
  EXPECT_THROW(chat.complete(request("q")), RetryBudgetExhausted);
  EXPECT_EQ(inner->calls, 3);
}

TEST(Gateway, NonTransientErrorSurfacesImmediately) {
  auto inner = std::make_shared<FlakyChat>(1, false);
  RetryingChatBackend chat(inner, {5, 1ms, 2.0}, [](auto) {});
  EXPECT_THROW(chat.complete(request("q")), RequestRejectedError);
  EXPECT_EQ(inner->calls, 1);
}

TEST(Gateway, ResponseParsing) {
  const auto [text, usage] = OpenAiChatBackend::parse_response(
      R"({"choices":[{"message":{"content":"hi"}}],"usage":{"prompt_tokens":4,"completion_tokens":2}})");
  EXPECT_EQ(text, "hi");
  EXPECT_EQ(usage, (TokenUsage{4, 2}));
  EXPECT_THROW(OpenAiChatBackend::parse_response("not json"), MalformedResponseError);
  EXPECT_THROW(OpenAiChatBackend::parse_response(R"({"choices":[]})"), MalformedResponseError);
  ChatRequest r = request("u");
  r.model = "m";
  r.temperature = 0.3;
  const auto body = OpenAiChatBackend::request_body(r);
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["messages"].back()["content"], "u");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.3);
}

// A loopback HTTP server standing in for the chat and reward endpoints.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(std::string_view path) const {
    return fmt::format("http://127.0.0.1:{}{}", port_, path);
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

class WireTest : public ::testing::Test {
 protected:
  void SetUp() override { ::setenv("THOUGHTNAV_TEST_KEY", "sk-test", 1); }
  void TearDown() override { ::unsetenv("THOUGHTNAV_TEST_KEY"); }

  BackendConfig chat_config(const LocalServer& s) const {
    BackendConfig cfg;
    cfg.base_url = s.url("/v1");
    cfg.api_key_env = "THOUGHTNAV_TEST_KEY";
    cfg.retry = {3, 1ms, 1.0};
    cfg.timeout = 5s;
    return cfg;
  }
};

TEST_F(WireTest, ChatRetriesRateLimitThenSucceeds) {
  LocalServer s;
  std::atomic<int> hits{0};
  std::string auth;
  s.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    if (hits++ == 0) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
      return;
    }
    res.set_content(
        R"({"choices":[{"message":{"content":"The answer is 5"}}],"usage":{"prompt_tokens":11,"completion_tokens":4}})",
        "application/json");
  });
  const BackendConfig cfg = chat_config(s);
  RetryingChatBackend chat(std::make_shared<OpenAiChatBackend>(cfg), cfg.retry, [](auto) {});
  const ChatExchange ex = chat.complete(request("2 + 3?"));
  EXPECT_EQ(ex.response, "The answer is 5");
  EXPECT_EQ(ex.usage, (TokenUsage{11, 4}));
  EXPECT_EQ(ex.attempts, 2);
  EXPECT_EQ(auth, "Bearer sk-test");
}

TEST_F(WireTest, ChatAuthAndMalformedBodies) {
  LocalServer s;
  s.server().Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
    if (req.body.find("deny") != std::string::npos) {
      res.status = 401;
      return;
    }
    res.set_content("{\"choices\": 3}", "application/json");
  });
  OpenAiChatBackend chat(chat_config(s));
  EXPECT_THROW(chat.complete(request("deny")), AuthError);
  EXPECT_THROW(chat.complete(request("other")), MalformedResponseError);
}

TEST_F(WireTest, MissingKeyIsAConfigError) {
  BackendConfig cfg;
  cfg.api_key_env = "THOUGHTNAV_TEST_KEY_ABSENT";
  EXPECT_THROW(OpenAiChatBackend{cfg}, ConfigError);
}

TEST_F(WireTest, UnreachableEndpointIsTransient) {
  BackendConfig cfg;
  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.api_key_env = "THOUGHTNAV_TEST_KEY";
  cfg.timeout = 2s;
  OpenAiChatBackend chat(cfg);
  EXPECT_THROW(chat.complete(request("x")), TransientError);
}

TEST_F(WireTest, HttpPrmScoresAndRetries) {
  LocalServer s;
  std::atomic<int> hits{0};
  nlohmann::json seen;
  s.server().Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 503;
      return;
    }
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"score": 0.625})", "application/json");
  });
  PrmConfig cfg;
  cfg.url = s.url("/score");
  cfg.retry = {3, 1ms, 1.0};
  HttpPrm prm(cfg, [](auto) {});
  const std::vector<std::string> steps = {"s1", "s2"};
  EXPECT_DOUBLE_EQ(score_process(prm, "P", steps), 0.625);
  EXPECT_EQ(hits.load(), 2);
  EXPECT_EQ(seen["problem"], "P");
  EXPECT_EQ(seen["steps"], nlohmann::json(steps));
  EXPECT_THROW(HttpPrm::parse_response(R"({"score":"high"})"), MalformedResponseError);
}

// --- reward model -------------------------------------------------------------

TEST(Prm, ScriptedScoresAndClamping) {
  ScriptedPrm prm({{{"The answer is 18"}, 0.765}, {{"overshoot"}, 1.3}, {{"under"}, -0.2}}, 0.4,
                  0.5);
  const std::vector<std::string> hit = {"so", "The answer is 18"};
  const std::vector<std::string> over = {"overshoot"};
  const std::vector<std::string> under = {"under"};
  const std::vector<std::string> other = {"nothing"};
  EXPECT_DOUBLE_EQ(score_process(prm, "P", hit), 0.765);
  EXPECT_DOUBLE_EQ(score_process(prm, "P", over), 1.0);
  EXPECT_DOUBLE_EQ(score_process(prm, "P", under), 0.0);
  EXPECT_DOUBLE_EQ(score_process(prm, "P", other), 0.4);
  EXPECT_DOUBLE_EQ(score_process(prm, "P", {}), 0.5);
  EXPECT_THROW(score_process(prm, "", hit), InputError);
  EXPECT_EQ(prm.call_count(), 5u);
}

// --- reasoning environment -------------------------------------------------------

class EnvTest : public ::testing::Test {
 protected:
  EnvTest() : chat_(block_rules(), false), prm_({{{"Refined"}, 0.6}}, 0.4, 0.5) {}
  ReasoningEnv make(EnvConfig cfg = {}) { return ReasoningEnv(chat_, &prm_, cfg); }

  ScriptedChatBackend chat_;
  ScriptedPrm prm_;
};

TEST_F(EnvTest, ResetProducesParsedState) {
  const ReasoningEnv env = make();
  const ResetOutcome r = env.reset(question());
  EXPECT_EQ(r.state, StateVector({2, 2, 2, 2, 2, 2, 2}));
  EXPECT_EQ(r.transcript.size(), 1u);
  EXPECT_EQ(r.transcript[0].purpose, "self_eval");
  EXPECT_TRUE(r.context.steps.empty());
  EXPECT_THROW(env.reset(question("q", "")), InputError);

  ScriptedChatBackend zero({rule("eval", "Please evaluate", {eval_text(0)})}, true);
  const ReasoningEnv env0(zero, nullptr, {});
  EXPECT_EQ(env0.reset(question()).state, StateVector{});
}

TEST_F(EnvTest, PartialEvaluationRetriesThenKeepsBest) {
  ScriptedChatBackend chat({rule("eval", "Please evaluate", {"A1 score=3", "A1 score=3\nA2 score=1"})},
                           true);
  EnvConfig cfg;
  cfg.self_eval_retry = 1;
  const ReasoningEnv env(chat, nullptr, cfg);
  const ResetOutcome r = env.reset(question());
  EXPECT_EQ(r.transcript.size(), 2u);
  EXPECT_EQ(r.state, StateVector({3, 1, 0, 0, 0, 0, 0}));

  ScriptedChatBackend junk({rule("eval", "Please evaluate", {"no markers"})}, true);
  const ReasoningEnv bad(junk, nullptr, cfg);
  EXPECT_THROW(bad.reset(question()), MalformedEvaluationError);
}

TEST_F(EnvTest, TerminateExtractsAnswer) {
  const ReasoningEnv env = make();
  const ResetOutcome r = env.reset(question());
  const StepOutcome s = env.step(r.context, r.state, ActionKind::kTerminate);
  EXPECT_TRUE(s.done);
  EXPECT_EQ(s.final_answer, "42");
  EXPECT_EQ(s.state, r.state);  // no self-evaluation after Terminate
  EXPECT_EQ(s.block_calls(), 1u);
  EXPECT_EQ(s.transcript.size(), 1u);
  EXPECT_DOUBLE_EQ(s.reward, 0.4);
}

TEST_F(EnvTest, DecomposeMakesSplitPlusSubtasksPlusSummary) {
  const ReasoningEnv env = make();
  const ResetOutcome r = env.reset(question());
  const StepOutcome s = env.step(r.context, r.state, ActionKind::kDecompose);
  EXPECT_EQ(s.block_calls(), 2u + 2u);  // k = 2 subtasks
  ASSERT_EQ(s.context.steps.size(), 1u);
  EXPECT_EQ(s.context.steps[0].text, "Summary of A and B");
  EXPECT_EQ(s.appended, "Summary of A and B");
  std::vector<std::string> purposes;
  for (const auto& c : s.transcript) purposes.push_back(c.purpose);
  EXPECT_EQ(purposes, (std::vector<std::string>{"decompose.split", "decompose.subtask",
                                                "decompose.subtask", "decompose.summary",
                                                "self_eval"}));
  // The second subtask sees the first one's result and its own id.
  const std::string& second = s.transcript[2].exchange.request.user;
  EXPECT_NE(second.find("### Subtask1: A\nsubtask result"), std::string::npos);
  EXPECT_NE(second.find("Subtask2: B to continue"), std::string::npos);
  EXPECT_FALSE(s.done);
}

TEST_F(EnvTest, DebateMakesThreeCalls) {
  const ReasoningEnv env = make();
  const ResetOutcome r = env.reset(question());
  const StepOutcome s = env.step(r.context, r.state, ActionKind::kDebate);
  EXPECT_EQ(s.block_calls(), 3u);
  EXPECT_EQ(s.appended, "Executed plan two");
  EXPECT_NE(s.transcript[2].exchange.request.user.find("Plan2: q"), std::string::npos);
}

TEST_F(EnvTest, UnparseableDecompositionIsAStepFailure) {
  auto rules = block_rules();
  rules[1].responses = {"no markers at all"};
  ScriptedChatBackend chat(rules, false);
  const ReasoningEnv env(chat, nullptr, {});
  const ResetOutcome r = env.reset(question());
  EXPECT_THROW(env.step(r.context, r.state, ActionKind::kDecompose), StepFailure);
}

TEST_F(EnvTest, RefineAtStepZeroRunsAsReason) {
  const ReasoningEnv env = make();
  const ResetOutcome r = env.reset(question());
  const StepOutcome s = env.step(r.context, r.state, ActionKind::kRefine);
  EXPECT_EQ(s.requested, ActionKind::kRefine);
  EXPECT_EQ(s.executed, ActionKind::kReasonOneStep);
  EXPECT_EQ(s.appended, "One more step");
  const StepOutcome t = env.step(s.context, s.state, ActionKind::kRefine);
  EXPECT_EQ(t.executed, ActionKind::kRefine);
  EXPECT_DOUBLE_EQ(t.reward, 0.6);  // reward is the PRM value on all steps
}

TEST_F(EnvTest, OnlyTerminateLegalForcesTermination) {
  EnvConfig cfg;
  cfg.max_actions = 2;
  const ReasoningEnv env = make(cfg);
  const ResetOutcome r = env.reset(question());
  const StepOutcome s = env.step(r.context, r.state, ActionKind::kReasonOneStep);
  EXPECT_EQ(legal_actions(s.context, cfg), ActionMask{ActionKind::kTerminate});
  const StepOutcome t = env.step(s.context, s.state, ActionKind::kDebate);
  EXPECT_TRUE(t.forced);
  EXPECT_EQ(t.executed, ActionKind::kTerminate);
  EXPECT_TRUE(t.done);
}

TEST_F(EnvTest, DisabledBlockIsRejected) {
  EnvConfig cfg;
  cfg.enabled_blocks.erase(ActionKind::kDebate);
  const ReasoningEnv env = make(cfg);
  const ResetOutcome r = env.reset(question());
  EXPECT_THROW(env.step(r.context, r.state, ActionKind::kDebate), InputError);
  EnvConfig bad;
  bad.enabled_blocks.erase(ActionKind::kTerminate);
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST_F(EnvTest, RandomPolicyEpisodesRespectTheStepLimit) {
  for (int max_actions = 1; max_actions <= 6; ++max_actions) {
    EnvConfig cfg;
    cfg.max_actions = max_actions;
    ScriptedChatBackend chat(block_rules("I cannot tell."), false);
    const ReasoningEnv env(chat, nullptr, cfg);
    RandomPolicy policy;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      const TrialRecord t = rollout(env, policy, question(), rng);
      ASSERT_FALSE(t.failed) << t.error;
      EXPECT_LE(static_cast<int>(t.actions.size()), max_actions);
      EXPECT_EQ(t.actions.back(), ActionKind::kTerminate);
      EXPECT_FALSE(t.answer.has_value());
    }
  }
}

TEST_F(EnvTest, EpisodeEnvAccumulatesTranscript) {
  const ReasoningEnv env = make();
  auto qs = std::make_shared<const std::vector<QuestionRecord>>(std::vector{question()});
  ReasoningEpisodeEnv ep(env, qs);
  Rng rng(1);
  ep.reset(rng);
  EXPECT_EQ(ep.transcript().size(), 1u);
  ep.step(ActionKind::kReasonOneStep);
  const EnvStep last = ep.step(ActionKind::kTerminate);
  EXPECT_TRUE(last.done);
  EXPECT_EQ(ep.transcript().size(), 4u);
  const auto j = transcript_to_json(ep.transcript());
  EXPECT_EQ(j[3]["purpose"], "terminate");
  EXPECT_THROW(ReasoningEpisodeEnv(env, std::make_shared<const std::vector<QuestionRecord>>()),
               InputError);
}

// --- evaluation -----------------------------------------------------------------

TEST(Dataset, ParsesAndValidates) {
  std::istringstream ok(
      R"({"id": 1, "question": "a?", "answer": "1", "kind": "gsm8k"}
{"id": "two", "question": "b?", "answer": "\\frac{1}{2}", "kind": "math", "level": 5}

{"id": 3, "question": "c?", "answer": "C", "kind": "choice"})");
  const auto ds = parse_dataset(ok);
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds[0].id, "1");
  EXPECT_EQ(ds[1].metadata["level"], 5);
  EXPECT_EQ(ds[2].kind, DatasetKind::kMultipleChoice);

  std::istringstream missing(
      "{\"id\":1,\"question\":\"a\",\"answer\":\"1\",\"kind\":\"gsm8k\"}\n"
      "{\"id\":2,\"question\":\"b\",\"kind\":\"gsm8k\"}\n");
  try {
    parse_dataset(missing);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("answer"), std::string::npos) << e.what();
  }
  std::istringstream dup(
      "{\"id\":1,\"question\":\"a\",\"answer\":\"1\",\"kind\":\"gsm8k\"}\n"
      "{\"id\":\"1\",\"question\":\"b\",\"answer\":\"2\",\"kind\":\"gsm8k\"}\n");
  EXPECT_THROW(parse_dataset(dup), DatasetError);
  std::istringstream empty("");
  EXPECT_TRUE(parse_dataset(empty).empty());
  std::istringstream junk("{not json\n");
  EXPECT_THROW(parse_dataset(junk), DatasetError);
  EXPECT_THROW(load_dataset("/nonexistent/file.jsonl"), DatasetError);
}

TEST(Dataset, WriteRoundTrip) {
  std::vector<QuestionRecord> ds = {question("a"), question("b", "Yes or no?", "no")};
  ds[1].kind = DatasetKind::kYesNo;
  ds[1].metadata["source"] = "x";
  std::stringstream buf;
  write_dataset(buf, ds);
  const auto back = parse_dataset(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].kind, DatasetKind::kYesNo);
  EXPECT_EQ(back[1].metadata, ds[1].metadata);
  EXPECT_EQ(record_to_json(back[0]), record_to_json(ds[0]));
}

TEST(Mining, AllSolvedAndAllWrong) {
  const std::vector<QuestionRecord> ds = {question("1", "6*7?", "42"), question("2", "40+2?", "42")};
  ScriptedChatBackend right({rule("d", "Please generate", {"The answer is 42"})}, true);
  const MiningResult a = mine_hard(ds, right);
  EXPECT_EQ(a.hard_count(), 0u);
  EXPECT_DOUBLE_EQ(a.proportion(), 0.0);
  ScriptedChatBackend wrong({rule("d", "Please generate", {"The answer is 41"})}, true);
  const MiningResult b = mine_hard(ds, wrong);
  EXPECT_EQ(b.hard_count(), 2u);
  EXPECT_DOUBLE_EQ(b.proportion(), 1.0);
  EXPECT_EQ(b.summary()["Total"], 2);
  ScriptedChatBackend none({rule("d", "Please generate", {"no idea"})}, true);
  EXPECT_EQ(mine_hard(ds, none).hard_count(), 2u);  // no extractable answer counts as hard
}

TEST(Mining, UnmatchedStrictScriptIsFatal) {
  const std::vector<QuestionRecord> ds = {question()};
  ScriptedChatBackend chat({}, true);
  EXPECT_THROW(mine_hard(ds, chat), UnmatchedPromptError);
}

TEST(Policies, FixedSequenceAndRandom) {
  FixedSequencePolicy fixed;
  ReasoningContext ctx;
  Rng rng(0);
  const ActionMask all = ActionMask::all();
  ActionMask first = all;
  first.erase(ActionKind::kRefine);
  EXPECT_EQ(fixed.choose(ctx, {}, first, rng), ActionKind::kDecompose);
  ctx.actions = {ActionKind::kDecompose};
  EXPECT_EQ(fixed.choose(ctx, {}, all, rng), ActionKind::kReasonOneStep);
  ctx.actions.push_back(ActionKind::kReasonOneStep);
  EXPECT_EQ(fixed.choose(ctx, {}, all, rng), ActionKind::kRefine);
  ctx.actions.push_back(ActionKind::kRefine);
  EXPECT_EQ(fixed.choose(ctx, {}, all, rng), ActionKind::kTerminate);
  EXPECT_EQ(fixed.choose(ReasoningContext{}, {}, ActionMask{ActionKind::kTerminate}, rng),
            ActionKind::kTerminate);

  RandomPolicy random;
  Rng r1(99), r2(99);
  for (int i = 0; i < 50; ++i) {
    const ActionKind a = random.choose(ctx, {}, first, r1);
    EXPECT_EQ(a, random.choose(ctx, {}, first, r2));
    EXPECT_TRUE(first.contains(a));
  }
}

class AlwaysTerminate : public Policy {
 public:
  ActionKind choose(const ReasoningContext&, const StateVector&, const ActionMask&,
                    Rng&) const override {
    return ActionKind::kTerminate;
  }
  std::string name() const override { return "terminate"; }
};

TEST(Evaluate, MajorityOfTrialsDecides) {
  ScriptedChatBackend chat(
      {rule("eval", "Please evaluate", {eval_text(1)}),
       rule("t", "Please generate", {"The answer is 42", "The answer is 41", "The answer is 42"})},
      true);
  const ReasoningEnv env(chat, nullptr, {});
  const std::vector<QuestionRecord> ds = {question()};
  EvalConfig cfg;
  cfg.trials = 3;
  const RunReport rep = evaluate(AlwaysTerminate{}, ds, cfg, env);
  ASSERT_EQ(rep.questions.size(), 1u);
  EXPECT_TRUE(rep.questions[0].correct);
  EXPECT_EQ(rep.questions[0].final_answer, "42");
  EXPECT_EQ(rep.correct, 1u);
  EXPECT_DOUBLE_EQ(rep.accuracy, 1.0);
  EXPECT_FALSE(rep.to_json().contains("wall_seconds"));
  EXPECT_EQ(rep.questions[0].trials.size(), 3u);

  chat.reset();
  cfg.trials = 1;
  const RunReport one = evaluate(AlwaysTerminate{}, ds, cfg, env);
  EXPECT_FALSE(one.questions[0].vote.has_value() && one.questions[0].vote->tie_broken);
  EXPECT_TRUE(one.questions[0].correct);
}

TEST(Evaluate, AuditCatchesInconsistentReports) {
  RunReport rep;
  rep.trials = 1;
  rep.questions.resize(2);
  rep.questions[0].gold = "4";
  rep.questions[0].final_answer = "4.0";
  rep.questions[0].correct = true;
  rep.questions[1].gold = "5";
  rep.questions[1].final_answer = "6";
  rep.correct = 2;
  rep.accuracy = 1.0;
  EXPECT_THROW(audit_report(rep), VerificationError);
  rep.correct = 1;
  rep.accuracy = 0.5;
  EXPECT_NO_THROW(audit_report(rep));
  rep.questions[1].correct = true;  // flag contradicts the answer
  rep.correct = 2;
  rep.accuracy = 1.0;
  EXPECT_THROW(audit_report(rep), VerificationError);
}

// --- run configuration -------------------------------------------------------------

TEST(RunConfig, MergeRejectsUnknownKeys) {
  RunConfig cfg;
  merge_json(cfg, nlohmann::json::parse(
                      R"({"seed": 7, "trainer": {"episodes": 12, "hidden": [16, 8]},
                          "env": {"enabled_blocks": ["reason", "terminate"]}})"));
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.trainer.episodes, 12);
  EXPECT_FALSE(cfg.env.enabled_blocks.contains(ActionKind::kDebate));
  EXPECT_THROW(merge_json(cfg, nlohmann::json::parse(R"({"trainer": {"epochs": 1}})")),
               ConfigError);
  EXPECT_THROW(merge_json(cfg, nlohmann::json::parse(R"({"sed": 1})")), ConfigError);
  EXPECT_THROW(merge_json(cfg, nlohmann::json::parse(R"({"seed": "x"})")), ConfigError);
}

TEST(RunConfig, EnvironmentOverridesAndFinalize) {
  RunConfig cfg;
  const std::map<std::string, std::string> vars = {{"THOUGHTNAV_MODEL", "m2"},
                                                   {"THOUGHTNAV_SEED", "11"}};
  apply_env(cfg, [&](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  });
  EXPECT_EQ(cfg.chat.model, "m2");
  EXPECT_EQ(cfg.seed, 11u);
  cfg.finalize();
  EXPECT_EQ(cfg.eval.seed, 11u);
  EXPECT_EQ(cfg.env.model, "m2");
  RunConfig bad;
  bad.eval.trials = 0;
  EXPECT_THROW(bad.finalize(), ConfigError);
}

TEST(RunConfig, ResolvedConfigRoundTrips) {
  RunConfig cfg;
  cfg.seed = 3;
  cfg.trainer.episodes = 9;
  cfg.env.max_actions = 4;
  cfg.chat.retry.max_attempts = 6;
  const auto dir = std::filesystem::temp_directory_path() / "thoughtnav_cfg_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_resolved_config(dir, cfg);
  const RunConfig back = load_run_config(dir / "resolved_config.json");
  EXPECT_EQ(to_json(back), to_json(cfg));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace thoughtnav
