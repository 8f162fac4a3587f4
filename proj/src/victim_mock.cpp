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

#include <algorithm>
#include <random>

#include "xmera/attacks.hpp"
#include "xmera/prompts.hpp"
#include "xmera/victim.hpp"

namespace xmera {
namespace {

constexpr int kAlternatives = 9;
constexpr double kTailRatio = 0.55;
constexpr double kMaxChosenLogprob = -1e-6;

enum class Channel { kNone, kAlpha, kContextOverride, kIrrelevantContext };

std::string_view channel_key(Channel c) {
  switch (c) {
    case Channel::kNone: return "none";
    case Channel::kAlpha: return "alpha";
    case Channel::kContextOverride: return "context-override";
    case Channel::kIrrelevantContext: return "irrelevant-context";
  }
  return "none";
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(Errc::kInvalidArgument, std::string(name) + " outside [0, 1]");
  }
}

}  // namespace

void validate(const MockKnowledge& kb) {
  check_probability(kb.p_follow_wrong_instruction, "p_follow_wrong_instruction");
  check_probability(kb.p_context_override, "p_context_override");
  check_probability(kb.p_irrelevant_context, "p_irrelevant_context");
  for (const TopKProfile* p : {&kb.confident, &kb.resisted, &kb.confused}) {
    if (!(p->chosen_logprob < 0.0)) {
      throw Error(Errc::kInvalidArgument, "profile logprob must be negative");
    }
    if (!(p->tail_mass >= 0.0) ||
        p->tail_mass + std::exp(p->chosen_logprob) > 1.0) {
      throw Error(Errc::kInvalidArgument, "profile mass exceeds 1");
    }
  }
  if (!(kb.confident.chosen_logprob > kb.confused.chosen_logprob &&
        kb.confident.tail_mass < kb.confused.tail_mass)) {
    throw Error(Errc::kInvalidArgument,
                "confident profile must be sharper than the confused profile");
  }
  if (!(kb.jitter >= 0.0)) {
    throw Error(Errc::kInvalidArgument, "jitter must be non-negative");
  }
}

GenerationTrace synthesize_trace(std::string_view text, const TopKProfile& profile,
                                 double jitter, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  double weights[kAlternatives];
  double weight_sum = 0.0;
  for (int i = 0; i < kAlternatives; ++i) {
    weights[i] = std::pow(kTailRatio, i);
    weight_sum += weights[i];
  }

  GenerationTrace trace;
  trace.answer_text = std::string(text);
  const std::vector<std::string> tokens = words(text);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    TokenPosition pos;
    pos.chosen_token = t == 0 ? tokens[t] : " " + tokens[t];
    const double lp =
        std::min(profile.chosen_logprob + jitter * noise(rng), kMaxChosenLogprob);
    const double chosen_p = std::exp(lp);
    const double tail = std::min(profile.tail_mass * std::exp(jitter * noise(rng)),
                                 (1.0 - chosen_p) * 0.999);
    pos.chosen_logprob = lp;
    pos.topk.push_back({pos.chosen_token, lp});
    for (int i = 0; i < kAlternatives && tail > 0.0; ++i) {
      const double p = std::min(tail * weights[i] / weight_sum, chosen_p);
      pos.topk.push_back({" <alt" + std::to_string(i + 1) + ">", std::log(p)});
    }
    std::stable_sort(pos.topk.begin(), pos.topk.end(),
                     [](const TokenLogprob& a, const TokenLogprob& b) {
                       return a.logprob > b.logprob;
                     });
    trace.positions.push_back(std::move(pos));
  }
  return trace;
}

MockVictim::MockVictim(MockKnowledge kb, std::string model_name)
    : kb_(std::move(kb)), model_name_(std::move(model_name)) {
  validate(kb_);
  for (std::size_t i = 0; i < kb_.entries.size(); ++i) {
    const MockEntry& e = kb_.entries[i];
    if (e.question.empty() || normalize(e.gold_answer).empty() ||
        normalize(e.wrong_answer).empty()) {
      throw Error(Errc::kInvalidArgument, "mock entry with empty fields");
    }
    by_question_.try_emplace(e.question, i);
    by_gold_.try_emplace(normalize(e.gold_answer), i);
  }
}

const MockEntry* MockVictim::find_question(std::string_view question) const {
  const auto it = by_question_.find(std::string(question));
  return it == by_question_.end() ? nullptr : &kb_.entries[it->second];
}

GenerationTrace MockVictim::generate(std::string_view query,
                                     std::uint64_t call_seed) const {
  const std::uint64_t trace_seed =
      derive_seed(kb_.seed ^ mix64(call_seed), query);

  // Dataset-builder prompts.
  if (auto bound = prompts::match(prompts::correct_context_template(), query)) {
    const std::string& q = (*bound)["q"];
    const std::string& a = (*bound)["a"];
    const MockEntry* entry = find_question(q);
    std::string sentence;
    if (entry != nullptr && !entry->context.empty()) {
      sentence = entry->context;
    } else {
      sentence = "The answer to the question \"" + q + "\" is " + a + ".";
    }
    return synthesize_trace(sentence, kb_.confident, kb_.jitter, trace_seed);
  }
  if (auto bound = prompts::match(prompts::adversarial_answer_template(), query)) {
    const auto it = by_gold_.find(normalize((*bound)["a"]));
    if (it == by_gold_.end()) {
      throw Error(Errc::kUnknownQuestion,
                  "no mock entry with gold answer '" + (*bound)["a"] + "'");
    }
    return synthesize_trace(kb_.entries[it->second].wrong_answer, kb_.confident,
                            kb_.jitter, trace_seed);
  }

  // [context " "] question [alpha suffix]
  std::string_view rest = query;
  bool alpha = false;
  if (rest.size() > kAlphaSuffix.size() && rest.ends_with(kAlphaSuffix)) {
    rest.remove_suffix(kAlphaSuffix.size());
    alpha = true;
  }
  const MockEntry* entry = find_question(rest);
  std::string_view context;
  for (std::size_t i = 0; entry == nullptr && i < rest.size(); ++i) {
    if (rest[i] != ' ' || i == 0) continue;
    entry = find_question(rest.substr(i + 1));
    if (entry != nullptr) context = rest.substr(0, i);
  }
  if (entry == nullptr) {
    throw Error(Errc::kUnknownQuestion,
                "query matches no mock knowledge entry: " + std::string(query));
  }

  Channel channel = Channel::kNone;
  double susceptibility = 0.0;
  if (alpha) {
    channel = Channel::kAlpha;
    susceptibility = kb_.p_follow_wrong_instruction;
  } else if (!context.empty()) {
    if (normalize(context).find(normalize(entry->wrong_answer)) != std::string::npos) {
      channel = Channel::kContextOverride;
      susceptibility = kb_.p_context_override;
    } else {
      channel = Channel::kIrrelevantContext;
      susceptibility = kb_.p_irrelevant_context;
    }
  }

  if (!entry->known) {
    return synthesize_trace(entry->wrong_answer, kb_.confused, kb_.jitter,
                            trace_seed);
  }
  if (channel == Channel::kNone) {
    return synthesize_trace(entry->gold_answer, kb_.confident, kb_.jitter,
                            trace_seed);
  }
  const double u = unit_interval(
      hash64(std::string(channel_key(channel)) + '\x1f' + entry->question, kb_.seed));
  if (u < susceptibility) {
    return synthesize_trace(entry->wrong_answer, kb_.confused, kb_.jitter,
                            trace_seed);
  }
  return synthesize_trace(entry->gold_answer, kb_.resisted, kb_.jitter, trace_seed);
}

GenerationTrace mock_generate(std::string_view query, const MockKnowledge& kb,
                              std::uint64_t call_seed) {
  return MockVictim(kb).generate(query, call_seed);
}

}  // namespace xmera
