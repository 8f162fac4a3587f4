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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "xmera/core.hpp"

namespace xmera {

/// Truthfulness labels over fact statements, keyed by normalized text.
/// Built from datasets whose records carry explicit labels.
class FactChecker {
 public:
  FactChecker() = default;

  /// Records the label for a statement. On conflicting labels true wins.
  void add(std::string_view statement, bool truthful);

  /// nullopt when the statement was never labeled.
  std::optional<bool> truthful(std::string_view statement) const;

  std::size_t size() const { return labels_.size(); }

  /// source_fact is labeled true, adversarial_context false.
  static FactChecker from_samples(std::span<const QaSample> samples);

 private:
  std::unordered_map<std::string, bool> labels_;
};

}  // namespace xmera
