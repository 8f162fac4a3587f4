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

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace xmera::prompts {

/// Template that asks for one factual sentence stating answer {a} to {q}.
std::string_view correct_context_template();
/// Template that asks for a different entity of the same type as {a}.
std::string_view adversarial_answer_template();

/// Substitutes every {q} and {a} placeholder.
std::string render(std::string_view tmpl, std::string_view question,
                   std::string_view answer);

/// Inverse of render: if `text` is an instance of `tmpl`, returns the
/// placeholder values ("q", "a"). A placeholder occurring more than once must
/// bind the same value each time.
std::optional<std::map<std::string, std::string>> match(std::string_view tmpl,
                                                        std::string_view text);

}  // namespace xmera::prompts
