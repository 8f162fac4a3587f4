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

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xmera/core.hpp"

namespace xmera {

enum class VictimKind { kRemote, kMock };

/// Request/response field names that differ between chat-completion
/// providers.
struct WireProfile {
  std::string path = "/v1/chat/completions";
  std::string logprobs_field = "logprobs";
  std::string top_logprobs_field = "top_logprobs";
};

struct VictimConfig {
  VictimKind kind = VictimKind::kMock;
  std::string endpoint;  // scheme://host[:port][/prefix], remote only
  std::string model_name = "mock";
  std::string api_key_env = "OPENAI_API_KEY";
  int top_k = 10;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  int max_concurrency = 4;
  WireProfile wire;
};

/// Throws kInvalidArgument unless top_k is in [1, 10], timeout > 0 and the
/// remaining numeric fields are in range.
void validate(const VictimConfig& config);

/// The generation process under attack. Implementations are safe to call
/// concurrently; `call_seed` makes a stochastic victim reproducible per call.
class Victim {
 public:
  virtual ~Victim() = default;
  virtual GenerationTrace generate(std::string_view query,
                                   std::uint64_t call_seed) const = 0;
  virtual std::string model_name() const = 0;
};

// ---------------------------------------------------------------------------
// Mock victim

struct MockEntry {
  std::string question;
  std::string gold_answer;
  std::string wrong_answer;
  std::string context;  // correct context sentence, optional
  bool known = true;    // unknown entries always answer wrong

  bool operator==(const MockEntry&) const = default;
};

/// Shape of the per-position top-k distribution: the chosen token's
/// probability and the mass spread geometrically over nine alternatives.
struct TopKProfile {
  double chosen_logprob = 0.0;
  double tail_mass = 0.0;
};

struct MockKnowledge {
  std::vector<MockEntry> entries;
  double p_follow_wrong_instruction = 0.85;  // alpha susceptibility
  double p_context_override = 0.46;          // context naming the wrong answer
  double p_irrelevant_context = 0.25;        // unrelated context
  TopKProfile confident{std::log(0.95), 0.01};
  TopKProfile resisted{std::log(0.85), 0.05};
  TopKProfile confused{std::log(0.5), 0.4};
  double jitter = 0.03;  // stddev of per-position logprob noise
  std::uint64_t seed = 0;
};

/// Throws kInvalidArgument when a probability is outside [0, 1], a profile
/// logprob is not negative, or the confident profile is not sharper than the
/// confused one.
void validate(const MockKnowledge& kb);

/// Deterministic stand-in for a logprob-capable chat model.
///
/// A query is parsed as [context " "] question [alpha suffix]. The question
/// must equal one knowledge entry. Whether an attack succeeds is decided once
/// per (seed, attack channel, question), so repeated runs of the same
/// attacked question agree and the sample-level success rate matches the
/// configured susceptibility. The per-call seed only perturbs the logprobs.
///
/// The mock also answers the two dataset-builder prompts: the correct-context
/// prompt returns the entry's context (or a templated sentence) and the
/// entity prompt returns the entry's wrong answer.
class MockVictim final : public Victim {
 public:
  explicit MockVictim(MockKnowledge kb, std::string model_name = "mock");

  GenerationTrace generate(std::string_view query,
                           std::uint64_t call_seed) const override;
  std::string model_name() const override { return model_name_; }

  const MockKnowledge& knowledge() const { return kb_; }

 private:
  const MockEntry* find_question(std::string_view question) const;

  MockKnowledge kb_;
  std::string model_name_;
  std::unordered_map<std::string, std::size_t> by_question_;
  std::unordered_map<std::string, std::size_t> by_gold_;
};

/// Free-function form of MockVictim::generate.
GenerationTrace mock_generate(std::string_view query, const MockKnowledge& kb,
                              std::uint64_t call_seed);

/// Builds a trace whose tokens are the whitespace-separated words of `text`
/// under the given profile. Exposed for tests and calibration.
GenerationTrace synthesize_trace(std::string_view text, const TopKProfile& profile,
                                 double jitter, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Remote victim

/// Maps a chat-completion response body to a trace: answer from
/// choices[0].message.content, positions from choices[0].logprobs.content.
/// Top-k lists are re-sorted and truncated to `top_k`. Throws
/// kMalformedProviderResponse on missing fields or positive logprobs.
GenerationTrace parse_chat_completion(std::string_view body, int top_k,
                                      const WireProfile& wire = {});

/// Serialized chat-completion request for one user message.
std::string build_chat_request(std::string_view query, const VictimConfig& config);

class RemoteVictim final : public Victim {
 public:
  explicit RemoteVictim(VictimConfig config);

  GenerationTrace generate(std::string_view query,
                           std::uint64_t call_seed) const override;
  std::string model_name() const override { return config_.model_name; }

 private:
  VictimConfig config_;
  std::string base_url_;
  std::string path_;
  mutable std::counting_semaphore<> slots_;
};

std::unique_ptr<Victim> make_victim(const VictimConfig& config,
                                    MockKnowledge kb = {});

}  // namespace xmera
