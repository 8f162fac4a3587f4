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

#include "xmera/fact_checker.hpp"

namespace xmera {

void FactChecker::add(std::string_view statement, bool truthful) {
  // A statement labeled true anywhere stays true, so a mislabeled record can
  // never turn a real fact into attack material.
  auto [it, inserted] = labels_.try_emplace(normalize(statement), truthful);
  if (!inserted) it->second = it->second || truthful;
}

std::optional<bool> FactChecker::truthful(std::string_view statement) const {
  const auto it = labels_.find(normalize(statement));
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

FactChecker FactChecker::from_samples(std::span<const QaSample> samples) {
  FactChecker checker;
  for (const QaSample& s : samples) {
    if (s.source_fact) checker.add(*s.source_fact, true);
    if (s.adversarial_context) checker.add(*s.adversarial_context, false);
  }
  return checker;
}

}  // namespace xmera
