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

#include "xmera/uncertainty.hpp"

#include <cmath>

namespace xmera {
namespace {

void check_positions(const GenerationTrace& trace) {
  if (trace.positions.empty()) {
    throw Error(Errc::kEmptyTrace, "trace has no generated positions");
  }
}

double checked_logprob(double lp) {
  if (std::isnan(lp) || lp > 0.0) {
    throw Error(Errc::kMalformedLogprob,
                "positive or NaN logprob " + std::to_string(lp));
  }
  return lp;
}

}  // namespace

double entropy(const GenerationTrace& trace) {
  check_positions(trace);
  double total = 0.0;
  for (const TokenPosition& pos : trace.positions) {
    if (pos.topk.empty()) {
      throw Error(Errc::kEmptyTrace, "position without top-k entries");
    }
    double h = 0.0;
    for (const TokenLogprob& entry : pos.topk) {
      const double lp = checked_logprob(entry.logprob);
      if (std::isinf(lp)) continue;  // p = 0
      h -= std::exp(lp) * lp;
    }
    total += h;
  }
  return total / static_cast<double>(trace.positions.size());
}

double perplexity(const GenerationTrace& trace) {
  check_positions(trace);
  double sum = 0.0;
  for (const TokenPosition& pos : trace.positions) {
    sum += checked_logprob(pos.chosen_logprob);
  }
  return std::exp(-sum / static_cast<double>(trace.positions.size()));
}

double token_prob(const GenerationTrace& trace) {
  check_positions(trace);
  double sum = 0.0;
  for (const TokenPosition& pos : trace.positions) {
    sum += std::exp(checked_logprob(pos.chosen_logprob));
  }
  return sum / static_cast<double>(trace.positions.size());
}

UncertaintyTriple measure(const GenerationTrace& trace) {
  return {entropy(trace), perplexity(trace), token_prob(trace)};
}

UncertaintyTriple aggregate_runs(std::span<const UncertaintyTriple> triples) {
  if (triples.empty()) {
    throw Error(Errc::kEmptyList, "aggregate_runs of no runs");
  }
  UncertaintyTriple mean{0.0, 0.0, 0.0};
  for (const UncertaintyTriple& t : triples) {
    mean.entropy += t.entropy;
    mean.perplexity += t.perplexity;
    mean.token_prob += t.token_prob;
  }
  const auto n = static_cast<double>(triples.size());
  mean.entropy /= n;
  mean.perplexity /= n;
  mean.token_prob /= n;
  return mean;
}

}  // namespace xmera
