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

#include "xmera/attacks.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <vector>

namespace xmera {
namespace {

AttackedQuery prepend(const std::string& context, const std::string& question,
                      AttackKind kind) {
  AttackedQuery out;
  out.original = question;
  out.perturbed = context + " " + question;
  out.kind = kind;
  out.injected_context = context;
  return out;
}

const std::string* context_of(const QaSample& s) {
  if (s.adversarial_context && !s.adversarial_context->empty()) {
    return &*s.adversarial_context;
  }
  if (s.source_fact && !s.source_fact->empty()) return &*s.source_fact;
  return nullptr;
}

}  // namespace

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone: return "none";
    case AttackKind::kAlpha: return "alpha";
    case AttackKind::kBeta: return "beta";
    case AttackKind::kGamma: return "gamma";
  }
  return "none";
}

AttackKind parse_attack_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "none") return AttackKind::kNone;
  if (lower == "alpha") return AttackKind::kAlpha;
  if (lower == "beta") return AttackKind::kBeta;
  if (lower == "gamma") return AttackKind::kGamma;
  throw Error(Errc::kInvalidArgument,
              "unknown attack kind '" + std::string(text) + "'");
}

AttackedQuery alpha_attack(std::string_view query) {
  if (query.empty()) throw Error(Errc::kEmptyQuery, "alpha attack on empty query");
  AttackedQuery out;
  out.original = std::string(query);
  out.perturbed = out.original;
  out.perturbed.append(kAlphaSuffix);
  out.kind = AttackKind::kAlpha;
  return out;
}

AttackedQuery beta_attack(const QaSample& sample, const FactChecker& checker) {
  if (!sample.adversarial_context || sample.adversarial_context->empty()) {
    throw Error(Errc::kMissingAdversarialContext,
                "sample '" + sample.id + "' has no adversarial context");
  }
  const std::optional<bool> label = checker.truthful(*sample.adversarial_context);
  if (!label.has_value() || *label) {
    throw Error(Errc::kContextNotFalse,
                "context for sample '" + sample.id + "' is not labeled false");
  }
  return prepend(*sample.adversarial_context, sample.question, AttackKind::kBeta);
}

AttackedQuery gamma_attack(const QaSample& sample,
                           std::span<const QaSample> pool, std::uint64_t seed) {
  std::vector<const std::string*> candidates;
  candidates.reserve(pool.size());
  for (const QaSample& other : pool) {
    if (other.id == sample.id) continue;
    if (const std::string* ctx = context_of(other)) candidates.push_back(ctx);
  }
  if (candidates.empty()) {
    throw Error(Errc::kPoolTooSmall,
                "no other pool member to draw a context from");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  AttackedQuery out =
      prepend(*candidates[pick(rng)], sample.question, AttackKind::kGamma);
  out.rng_seed = seed;
  return out;
}

AttackedQuery apply(AttackKind kind, const QaSample& sample,
                    const AttackInputs& inputs) {
  switch (kind) {
    case AttackKind::kNone: {
      AttackedQuery out;
      out.original = sample.question;
      out.perturbed = sample.question;
      return out;
    }
    case AttackKind::kAlpha:
      return alpha_attack(sample.question);
    case AttackKind::kBeta:
      if (inputs.checker == nullptr) {
        throw Error(Errc::kContextNotFalse, "beta attack without a fact checker");
      }
      return beta_attack(sample, *inputs.checker);
    case AttackKind::kGamma:
      return gamma_attack(sample, inputs.pool, inputs.seed);
  }
  throw Error(Errc::kInvalidArgument, "unhandled attack kind");
}

}  // namespace xmera
