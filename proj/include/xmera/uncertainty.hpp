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

#include <span>

#include "xmera/core.hpp"

namespace xmera {

/// Entropy (nats), perplexity and mean chosen-token probability of one answer.
struct UncertaintyTriple {
  double entropy = 0.0;
  double perplexity = 1.0;
  double token_prob = 1.0;

  bool operator==(const UncertaintyTriple&) const = default;
};

// All metrics average over the T generated positions and use natural logs.
// They throw kEmptyTrace on a trace without positions and kMalformedLogprob
// on a positive log-probability.

/// Mean over positions of -sum p ln p across the top-k entries. The truncated
/// top-k mass is used as-is, without renormalization; 0 ln 0 is 0.
double entropy(const GenerationTrace& trace);

/// exp of the mean negative chosen-token logprob.
double perplexity(const GenerationTrace& trace);

/// Mean of exp(chosen logprob).
double token_prob(const GenerationTrace& trace);

UncertaintyTriple measure(const GenerationTrace& trace);

/// Component-wise arithmetic mean of per-run triples. Throws kEmptyList.
UncertaintyTriple aggregate_runs(std::span<const UncertaintyTriple> triples);

}  // namespace xmera
