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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xmera/error.hpp"

namespace xmera {

enum class DatasetTag { kTQA, kHQA, kNQ, kOther };

std::string_view to_string(DatasetTag tag);
/// Accepts "TQA", "HQA", "NQ", "OTHER" (case-insensitive).
DatasetTag parse_dataset_tag(std::string_view text);

/// One QA item: the unit of evaluation.
struct QaSample {
  std::string id;
  std::string question;
  std::string gold_answer;
  std::optional<std::string> source_fact;
  std::optional<std::string> adversarial_context;
  DatasetTag dataset_tag = DatasetTag::kOther;

  bool operator==(const QaSample&) const = default;
};

/// Throws Error(kInvariantViolation) when the sample breaks its invariants.
void validate(const QaSample& sample);

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;

  bool operator==(const TokenLogprob&) const = default;
};

struct TokenPosition {
  std::string chosen_token;
  double chosen_logprob = 0.0;
  std::vector<TokenLogprob> topk;  // sorted descending, at most kMaxTopK

  bool operator==(const TokenPosition&) const = default;
};

inline constexpr std::size_t kMaxTopK = 10;

/// One model response with its per-position top-k log-probabilities.
struct GenerationTrace {
  std::string answer_text;
  std::vector<TokenPosition> positions;

  bool operator==(const GenerationTrace&) const = default;
};

/// Throws Error(kMalformedLogprob) on positive logprobs, unsorted top-k or
/// a chosen logprob disagreeing with its top-k entry, and Error(kEmptyTrace)
/// when a non-empty answer has no positions.
void validate(const GenerationTrace& trace);

/// Output of the correctness oracle. matched_span holds byte offsets into the
/// normalized model answer and is present iff correct.
struct Verdict {
  bool correct = false;
  std::optional<std::pair<std::size_t, std::size_t>> matched_span;

  bool operator==(const Verdict&) const = default;
};

/// NFKC, case fold, whitespace runs collapsed to one space, outer whitespace
/// and outer ASCII punctuation stripped. Idempotent.
std::string normalize(std::string_view text);

/// Correct iff normalize(gold) is a contiguous substring of
/// normalize(model_answer).
Verdict oracle_check(std::string_view gold, std::string_view model_answer);

/// Most frequent answer by normalized form. Ties go to the answer whose
/// normalized form occurs first; the earliest raw representative is returned.
std::string majority_answer(std::span<const std::string> answers);

// Hashing and seed derivation shared by every module that needs
// reproducible randomness.

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash64(std::string_view bytes, std::uint64_t seed = 0);
std::uint64_t derive_seed(std::uint64_t base, std::string_view key);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);
/// Uniform double in [0, 1) from a 64-bit hash.
double unit_interval(std::uint64_t bits);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace xmera
