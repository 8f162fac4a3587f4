// Copyright 2026 The Xmera Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "xmera/attacks.hpp"
#include "xmera/prompts.hpp"
#include "xmera/uncertainty.hpp"
#include "xmera/victim.hpp"

namespace xmera {
namespace {

using nlohmann::json;

MockKnowledge small_kb() {
  MockKnowledge kb;
  kb.entries = {
      {"Who wrote Hamlet?", "William Shakespeare", "Christopher Marlowe",
       "Hamlet was written by William Shakespeare.", true},
      {"What is the capital of Australia?", "Canberra", "Sydney",
       "The capital of Australia is Canberra.", true},
      {"Who painted the Night Watch?", "Rembrandt", "Vermeer", "", false},
  };
  kb.seed = 42;
  return kb;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::kInvalidArgument;
}

TEST(Mock, UnattackedKnownQuestionAnswersGold) {
  const MockVictim v(small_kb());
  const GenerationTrace t = v.generate("Who wrote Hamlet?", 1);
  EXPECT_TRUE(oracle_check("William Shakespeare", t.answer_text).correct);
  EXPECT_NO_THROW(validate(t));
  EXPECT_EQ(t.positions.size(), 2u);
  EXPECT_EQ(t.positions[1].chosen_token, " Shakespeare");
}

TEST(Mock, AlphaWithFullSusceptibilityAnswersWrong) {
  MockKnowledge kb = small_kb();
  kb.p_follow_wrong_instruction = 1.0;
  const MockVictim v(kb);
  const auto q = alpha_attack("Who wrote Hamlet?").perturbed;
  EXPECT_EQ(v.generate(q, 3).answer_text, "Christopher Marlowe");
}

TEST(Mock, AlphaWithZeroSusceptibilityStaysLessUncertainThanConfused) {
  MockKnowledge kb = small_kb();
  kb.p_follow_wrong_instruction = 0.0;
  kb.jitter = 0.0;
  const MockVictim v(kb);
  const GenerationTrace t = v.generate(alpha_attack("Who wrote Hamlet?").perturbed, 3);
  EXPECT_EQ(t.answer_text, "William Shakespeare");
  const GenerationTrace confused =
      synthesize_trace("William Shakespeare", kb.confused, 0.0, 1);
  EXPECT_LT(entropy(t), entropy(confused));
}

TEST(Mock, ContextNamingWrongAnswerOverridesAtFullSusceptibility) {
  MockKnowledge kb = small_kb();
  kb.p_context_override = 1.0;
  const MockVictim v(kb);
  const GenerationTrace t = v.generate(
      "Hamlet was written by Christopher Marlowe. Who wrote Hamlet?", 5);
  EXPECT_EQ(t.answer_text, "Christopher Marlowe");
}

TEST(Mock, IrrelevantContextUsesItsOwnSusceptibility) {
  MockKnowledge kb = small_kb();
  kb.p_context_override = 0.0;
  kb.p_irrelevant_context = 1.0;
  const MockVictim v(kb);
  EXPECT_EQ(v.generate("The capital of Australia is Canberra. Who wrote Hamlet?", 5)
                .answer_text,
            "Christopher Marlowe");
  kb.p_irrelevant_context = 0.0;
  EXPECT_EQ(MockVictim(kb)
                .generate("The capital of Australia is Canberra. Who wrote Hamlet?", 5)
                .answer_text,
            "William Shakespeare");
}

TEST(Mock, UnknownEntryAnswersWrongAndUnknownQuestionThrows) {
  const MockVictim v(small_kb());
  EXPECT_EQ(v.generate("Who painted the Night Watch?", 1).answer_text, "Vermeer");
  EXPECT_EQ(code_of([&] { v.generate("Who built the pyramids?", 1); }),
            Errc::kUnknownQuestion);
}

TEST(Mock, DeterministicPerQueryAndSeed) {
  const MockVictim v(small_kb());
  const std::string q = alpha_attack("Who wrote Hamlet?").perturbed;
  EXPECT_EQ(v.generate(q, 9), v.generate(q, 9));
  EXPECT_NE(v.generate(q, 9).positions[0].chosen_logprob,
            v.generate(q, 10).positions[0].chosen_logprob);
  // The answer itself does not depend on the call seed.
  EXPECT_EQ(v.generate(q, 9).answer_text, v.generate(q, 10).answer_text);
}

TEST(Mock, AlphaSuccessRateMatchesSusceptibility) {
  // 10,000 distinct alpha-attacked questions at p = 0.6; sigma = sqrt(.24/1e4).
  MockKnowledge kb;
  kb.p_follow_wrong_instruction = 0.6;
  kb.seed = 17;
  for (int i = 0; i < 10000; ++i) {
    kb.entries.push_back({"question " + std::to_string(i) + "?", "gold" + std::to_string(i),
                          "wrong" + std::to_string(i), "", true});
  }
  const MockVictim v(kb);
  int wrong = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto t = v.generate(alpha_attack(kb.entries[i].question).perturbed, i);
    wrong += t.answer_text == kb.entries[i].wrong_answer;
  }
  const double sigma = std::sqrt(0.6 * 0.4 / 10000);
  EXPECT_NEAR(wrong / 10000.0, 0.6, 3 * sigma);
}

TEST(Mock, ConfusedProfileHasHigherEntropyThanConfident) {
  const MockKnowledge kb;
  double confused = 0, confident = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    confused += entropy(synthesize_trace("some answer", kb.confused, kb.jitter, s));
    confident += entropy(synthesize_trace("some answer", kb.confident, kb.jitter, s));
  }
  EXPECT_GT(confused, confident);
}

TEST(Mock, AnswersBuilderPrompts) {
  const MockVictim v(small_kb());
  const std::string ctx_prompt = prompts::render(prompts::correct_context_template(),
                                                 "Who wrote Hamlet?", "William Shakespeare");
  EXPECT_EQ(v.generate(ctx_prompt, 1).answer_text,
            "Hamlet was written by William Shakespeare.");
  const std::string swap_prompt =
      prompts::render(prompts::adversarial_answer_template(), "", "Canberra");
  EXPECT_EQ(v.generate(swap_prompt, 1).answer_text, "Sydney");
}

TEST(Mock, ValidateRejectsBadParameters) {
  MockKnowledge kb = small_kb();
  kb.p_follow_wrong_instruction = 1.5;
  EXPECT_THROW(validate(kb), Error);
  kb = small_kb();
  kb.confident = kb.confused;
  EXPECT_THROW(validate(kb), Error);
  kb = small_kb();
  kb.confused.chosen_logprob = 0.0;
  EXPECT_THROW(validate(kb), Error);
}

TEST(Mock, SynthesizedTracesAreValid) {
  const MockKnowledge kb;
  for (std::uint64_t s = 0; s < 500; ++s) {
    for (const TopKProfile* p : {&kb.confident, &kb.resisted, &kb.confused}) {
      const GenerationTrace t = synthesize_trace("a b c", *p, 0.2, s);
      ASSERT_NO_THROW(validate(t));
      for (const TokenPosition& pos : t.positions) {
        double mass = 0;
        for (const TokenLogprob& e : pos.topk) mass += std::exp(e.logprob);
        ASSERT_LE(mass, 1.0 + 1e-9);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Remote

json completion(const std::string& content) {
  json items = json::array();
  items.push_back({{"token", "Par"},
                   {"logprob", -0.1},
                   {"top_logprobs",
                    {{{"token", "Lon"}, {"logprob", -3.0}},
                     {{"token", "Par"}, {"logprob", -0.1}}}}});
  items.push_back({{"token", "is"},
                   {"logprob", -0.01},
                   {"top_logprobs", {{{"token", "is"}, {"logprob", -0.01}}}}});
  return {{"choices",
           {{{"message", {{"role", "assistant"}, {"content", content}}},
             {"logprobs", {{"content", items}}}}}}};
}

TEST(ParseCompletion, MapsAndSortsTopK) {
  const GenerationTrace t = parse_chat_completion(completion("Paris").dump(), 10);
  EXPECT_EQ(t.answer_text, "Paris");
  ASSERT_EQ(t.positions.size(), 2u);
  EXPECT_EQ(t.positions[0].topk[0].token, "Par");
  EXPECT_EQ(t.positions[0].topk[1].token, "Lon");
  EXPECT_EQ(parse_chat_completion(completion("Paris").dump(), 1).positions[0].topk.size(),
            1u);
}

TEST(ParseCompletion, RejectsMalformedPayloads) {
  json no_logprobs = completion("Paris");
  no_logprobs["choices"][0].erase("logprobs");
  EXPECT_EQ(code_of([&] { parse_chat_completion(no_logprobs.dump(), 10); }),
            Errc::kMalformedProviderResponse);
  json positive = completion("Paris");
  positive["choices"][0]["logprobs"]["content"][0]["logprob"] = 0.5;
  EXPECT_EQ(code_of([&] { parse_chat_completion(positive.dump(), 10); }),
            Errc::kMalformedProviderResponse);
  EXPECT_EQ(code_of([] { parse_chat_completion("not json", 10); }),
            Errc::kMalformedProviderResponse);
  EXPECT_EQ(code_of([] { parse_chat_completion(R"({"choices":[]})", 10); }),
            Errc::kMalformedProviderResponse);
}

TEST(ParseCompletion, CustomWireProfile) {
  std::string body = completion("Paris").dump();
  json doc = json::parse(body);
  doc["choices"][0]["lp"] = doc["choices"][0]["logprobs"];
  doc["choices"][0].erase("logprobs");
  for (json& item : doc["choices"][0]["lp"]["content"]) {
    item["alts"] = item["top_logprobs"];
    item.erase("top_logprobs");
  }
  WireProfile wire;
  wire.logprobs_field = "lp";
  wire.top_logprobs_field = "alts";
  EXPECT_EQ(parse_chat_completion(doc.dump(), 10, wire).positions.size(), 2u);
}

TEST(BuildRequest, CarriesLogprobSettings) {
  VictimConfig cfg;
  cfg.model_name = "m";
  cfg.top_k = 7;
  const json req = json::parse(build_chat_request("Q?", cfg));
  EXPECT_EQ(req["model"], "m");
  EXPECT_EQ(req["messages"][0]["role"], "user");
  EXPECT_EQ(req["messages"][0]["content"], "Q?");
  EXPECT_EQ(req["logprobs"], true);
  EXPECT_EQ(req["top_logprobs"], 7);
  EXPECT_EQ(req["temperature"], 0.0);
}

class StubProvider {
 public:
  StubProvider() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      const int now = ++in_flight_;
      int seen = max_in_flight_.load();
      while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
      }
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      const int call = ++calls_;
      --in_flight_;
      if (call <= fail_first_) {
        res.status = fail_status_;
        return;
      }
      res.status = 200;
      res.set_content(body_, "application/json");
    });
    server_.Post("/proxy/v1/chat/completions",
                 [](const httplib::Request&, httplib::Response& res) {
                   res.set_content(completion("prefixed").dump(), "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubProvider() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0}, in_flight_{0}, max_in_flight_{0};
  int fail_first_ = 0;
  int fail_status_ = 500;
  int delay_ms_ = 0;
  std::string body_ = completion("Paris is the capital").dump();
  std::string last_auth_, last_body_;
};

VictimConfig remote_config(const std::string& url) {
  VictimConfig cfg;
  cfg.kind = VictimKind::kRemote;
  cfg.endpoint = url;
  cfg.model_name = "stub-model";
  cfg.api_key_env = "XMERA_TEST_KEY";
  cfg.backoff_base = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::milliseconds(5000);
  return cfg;
}

class RemoteTest : public ::testing::Test {
 protected:
  void SetUp() override { ::setenv("XMERA_TEST_KEY", "sk-test", 1); }
  void TearDown() override { ::unsetenv("XMERA_TEST_KEY"); }
};

TEST_F(RemoteTest, SuccessSendsBearerKeyAndParses) {
  StubProvider stub;
  const RemoteVictim v(remote_config(stub.url()));
  const GenerationTrace t = v.generate("Capital of France?", 0);
  EXPECT_EQ(t.answer_text, "Paris is the capital");
  EXPECT_EQ(stub.last_auth_, "Bearer sk-test");
  EXPECT_EQ(json::parse(stub.last_body_)["messages"][0]["content"], "Capital of France?");
  EXPECT_EQ(v.model_name(), "stub-model");
}

TEST_F(RemoteTest, EndpointPathPrefixIsKept) {
  StubProvider stub;
  const RemoteVictim v(remote_config(stub.url() + "/proxy/"));
  EXPECT_EQ(v.generate("Q?", 0).answer_text, "prefixed");
}

TEST_F(RemoteTest, RetriesRateLimitThenSucceeds) {
  StubProvider stub;
  stub.fail_first_ = 2;
  stub.fail_status_ = 429;
  const RemoteVictim v(remote_config(stub.url()));
  EXPECT_EQ(v.generate("Q?", 0).answer_text, "Paris is the capital");
  EXPECT_EQ(stub.calls_.load(), 3);
}

TEST_F(RemoteTest, GivesUpAfterRetries) {
  StubProvider stub;
  stub.fail_first_ = 100;
  stub.fail_status_ = 429;
  const RemoteVictim v(remote_config(stub.url()));
  EXPECT_EQ(code_of([&] { v.generate("Q?", 0); }), Errc::kRateLimited);
  EXPECT_EQ(stub.calls_.load(), 4);  // first try + 3 retries
}

TEST_F(RemoteTest, ServerErrorsAreRetriedAndSurfaceAsUpstreamError) {
  StubProvider stub;
  stub.fail_first_ = 100;
  stub.fail_status_ = 503;
  const RemoteVictim v(remote_config(stub.url()));
  EXPECT_EQ(code_of([&] { v.generate("Q?", 0); }), Errc::kUpstreamError);
}

TEST_F(RemoteTest, UnauthorizedIsNotRetried) {
  StubProvider stub;
  stub.fail_first_ = 100;
  stub.fail_status_ = 401;
  const RemoteVictim v(remote_config(stub.url()));
  EXPECT_EQ(code_of([&] { v.generate("Q?", 0); }), Errc::kAuthError);
  EXPECT_EQ(stub.calls_.load(), 1);
}

TEST_F(RemoteTest, MissingCredentialIsAuthError) {
  StubProvider stub;
  ::unsetenv("XMERA_TEST_KEY");
  const RemoteVictim v(remote_config(stub.url()));
  EXPECT_EQ(code_of([&] { v.generate("Q?", 0); }), Errc::kAuthError);
  EXPECT_EQ(stub.calls_.load(), 0);
}

TEST_F(RemoteTest, MalformedBodyIsReported) {
  StubProvider stub;
  json body = completion("x");
  body["choices"][0].erase("logprobs");
  stub.body_ = body.dump();
  const RemoteVictim v(remote_config(stub.url()));
  EXPECT_EQ(code_of([&] { v.generate("Q?", 0); }), Errc::kMalformedProviderResponse);
}

TEST_F(RemoteTest, UnreachableUpstreamFails) {
  VictimConfig cfg = remote_config("http://127.0.0.1:1");
  cfg.max_retries = 1;
  const RemoteVictim v(cfg);
  const Errc code = code_of([&] { v.generate("Q?", 0); });
  EXPECT_TRUE(code == Errc::kUpstreamError || code == Errc::kTimeout);
}

TEST_F(RemoteTest, ConcurrencyIsBounded) {
  StubProvider stub;
  stub.delay_ms_ = 30;
  VictimConfig cfg = remote_config(stub.url());
  cfg.max_concurrency = 2;
  const RemoteVictim v(cfg);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { v.generate("Q?", 0); });
  for (auto& t : threads) t.join();
  EXPECT_EQ(stub.calls_.load(), 8);
  EXPECT_LE(stub.max_in_flight_.load(), 2);
}

TEST(VictimConfig, Validation) {
  VictimConfig cfg;
  cfg.top_k = 11;
  EXPECT_THROW(validate(cfg), Error);
  cfg.top_k = 10;
  cfg.timeout = std::chrono::milliseconds(0);
  EXPECT_THROW(validate(cfg), Error);
  cfg.timeout = std::chrono::milliseconds(10);
  cfg.kind = VictimKind::kRemote;
  EXPECT_THROW(validate(cfg), Error);  // no endpoint
  cfg.endpoint = "http://localhost";
  EXPECT_NO_THROW(validate(cfg));
}

}  // namespace
}  // namespace xmera
