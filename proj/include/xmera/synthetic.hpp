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

#include <cstdint>
#include <vector>

#include "xmera/core.hpp"
#include "xmera/victim.hpp"

namespace xmera {

/// Made-up closed-book QA items over invented entities, with the matching
/// mock knowledge (gold answer, same-type wrong answer, context sentence).
/// Every entity name is unique in the corpus, so no answer occurs in an
/// unrelated context. Dataset tags cycle TQA, HQA, NQ.
struct SyntheticCorpus {
  std::vector<QaSample> samples;
  std::vector<MockEntry> entries;
};

SyntheticCorpus synthetic_corpus(std::size_t n, std::uint64_t seed);

}  // namespace xmera
