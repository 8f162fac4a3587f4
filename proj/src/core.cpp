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
#include <array>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include <openssl/evp.h>

#include "xmera/core.hpp"

namespace xmera {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kEmptyGold: return "EmptyGold";
    case Errc::kEmptyList: return "EmptyList";
    case Errc::kEmptyQuery: return "EmptyQuery";
    case Errc::kMissingAdversarialContext: return "MissingAdversarialContext";
    case Errc::kContextNotFalse: return "ContextNotFalse";
    case Errc::kPoolTooSmall: return "PoolTooSmall";
    case Errc::kEmptyTrace: return "EmptyTrace";
    case Errc::kMalformedLogprob: return "MalformedLogprob";
    case Errc::kTimeout: return "Timeout";
    case Errc::kAuthError: return "AuthError";
    case Errc::kMalformedProviderResponse: return "MalformedProviderResponse";
    case Errc::kRateLimited: return "RateLimited";
    case Errc::kUnknownQuestion: return "UnknownQuestion";
    case Errc::kUpstreamError: return "UpstreamError";
    case Errc::kSingleClass: return "SingleClass";
    case Errc::kInsufficientData: return "InsufficientData";
    case Errc::kFeatureDimMismatch: return "FeatureDimMismatch";
    case Errc::kTooFewPerClass: return "TooFewPerClass";
    case Errc::kUnsupportedFormat: return "UnsupportedFormat";
    case Errc::kGenerationFailed: return "GenerationFailed";
    case Errc::kAnswerNotInContext: return "AnswerNotInContext";
    case Errc::kIoError: return "IoError";
    case Errc::kSchemaError: return "SchemaError";
    case Errc::kInvariantViolation: return "InvariantViolation";
    case Errc::kBindError: return "BindError";
  }
  return "Unknown";
}

std::string_view to_string(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::kTQA: return "TQA";
    case DatasetTag::kHQA: return "HQA";
    case DatasetTag::kNQ: return "NQ";
    case DatasetTag::kOther: return "OTHER";
  }
  return "OTHER";
}

DatasetTag parse_dataset_tag(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "TQA") return DatasetTag::kTQA;
  if (upper == "HQA") return DatasetTag::kHQA;
  if (upper == "NQ") return DatasetTag::kNQ;
  if (upper == "OTHER") return DatasetTag::kOther;
  throw Error(Errc::kInvalidArgument,
              "unknown dataset tag '" + std::string(text) + "'");
}

void validate(const QaSample& sample) {
  if (normalize(sample.question).empty()) {
    throw Error(Errc::kInvariantViolation,
                "sample '" + sample.id + "' has an empty question");
  }
  if (normalize(sample.gold_answer).empty()) {
    throw Error(Errc::kInvariantViolation,
                "sample '" + sample.id + "' has an empty gold answer");
  }
  if (sample.adversarial_context) {
    if (sample.adversarial_context->empty()) {
      throw Error(Errc::kInvariantViolation,
                  "sample '" + sample.id + "' has an empty adversarial context");
    }
    if (sample.source_fact && *sample.source_fact == *sample.adversarial_context) {
      throw Error(Errc::kInvariantViolation,
                  "sample '" + sample.id +
                      "' adversarial context equals its source fact");
    }
  }
}

void validate(const GenerationTrace& trace) {
  if (trace.positions.empty() && !trace.answer_text.empty()) {
    throw Error(Errc::kEmptyTrace, "non-empty answer without token positions");
  }
  for (std::size_t t = 0; t < trace.positions.size(); ++t) {
    const TokenPosition& pos = trace.positions[t];
    const std::string where = "position " + std::to_string(t);
    if (!std::isfinite(pos.chosen_logprob) || pos.chosen_logprob > 0.0) {
      throw Error(Errc::kMalformedLogprob, where + ": chosen logprob > 0");
    }
    if (pos.topk.size() > kMaxTopK) {
      throw Error(Errc::kMalformedLogprob, where + ": more than 10 top-k entries");
    }
    for (std::size_t i = 0; i < pos.topk.size(); ++i) {
      const double lp = pos.topk[i].logprob;
      if (std::isnan(lp) || lp > 0.0) {
        throw Error(Errc::kMalformedLogprob, where + ": top-k logprob > 0");
      }
      if (i > 0 && pos.topk[i - 1].logprob < lp) {
        throw Error(Errc::kMalformedLogprob, where + ": top-k not sorted");
      }
      if (pos.topk[i].token == pos.chosen_token &&
          std::abs(lp - pos.chosen_logprob) > 1e-6) {
        throw Error(Errc::kMalformedLogprob,
                    where + ": chosen logprob disagrees with top-k");
      }
    }
  }
}

std::string majority_answer(std::span<const std::string> answers) {
  if (answers.empty()) {
    throw Error(Errc::kEmptyList, "majority_answer of an empty list");
  }
  struct Tally {
    std::size_t first = 0;
    std::size_t count = 0;
  };
  std::unordered_map<std::string, Tally> tallies;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    auto key = normalize(answers[i]);
    auto [it, inserted] = tallies.try_emplace(key, Tally{i, 0});
    if (inserted) order.push_back(std::move(key));
    ++it->second.count;
  }
  const Tally* best = nullptr;
  for (const auto& key : order) {
    const Tally& tally = tallies.at(key);
    if (best == nullptr || tally.count > best->count) best = &tally;
  }
  return answers[best->first];
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xCBF29CE484222325ULL ^ mix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix64(h);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view key) {
  return mix64(base ^ hash64(key));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::kInvalidArgument, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace xmera
