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

#include "xmera/prompts.hpp"

#include <vector>

#include "xmera/prompts_generated.hpp"

namespace xmera::prompts {
namespace {

struct Piece {
  bool placeholder = false;
  std::string text;  // literal text, or placeholder name
};

std::vector<Piece> split(std::string_view tmpl) {
  std::vector<Piece> pieces;
  std::string literal;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}' &&
        (tmpl[i + 1] == 'q' || tmpl[i + 1] == 'a')) {
      if (!literal.empty()) pieces.push_back({false, std::move(literal)});
      literal.clear();
      pieces.push_back({true, std::string(1, tmpl[i + 1])});
      i += 2;
    } else {
      literal.push_back(tmpl[i]);
    }
  }
  if (!literal.empty()) pieces.push_back({false, std::move(literal)});
  return pieces;
}

}  // namespace

std::string_view correct_context_template() { return generated::kCorrectContext; }

std::string_view adversarial_answer_template() {
  return generated::kAdversarialAnswer;
}

std::string render(std::string_view tmpl, std::string_view question,
                   std::string_view answer) {
  std::string out;
  for (const Piece& piece : split(tmpl)) {
    if (!piece.placeholder) {
      out += piece.text;
    } else {
      out += piece.text == "q" ? question : answer;
    }
  }
  return out;
}

std::optional<std::map<std::string, std::string>> match(std::string_view tmpl,
                                                        std::string_view text) {
  const std::vector<Piece> pieces = split(tmpl);
  std::map<std::string, std::string> bound;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Piece& piece = pieces[i];
    if (!piece.placeholder) {
      if (text.substr(cursor, piece.text.size()) != piece.text) return std::nullopt;
      cursor += piece.text.size();
      continue;
    }
    // A placeholder extends up to the next literal (or the end of the text).
    std::size_t end = text.size();
    if (i + 1 < pieces.size()) {
      end = text.find(pieces[i + 1].text, cursor);
      if (end == std::string_view::npos) return std::nullopt;
    }
    std::string value(text.substr(cursor, end - cursor));
    auto [it, inserted] = bound.try_emplace(piece.text, value);
    if (!inserted && it->second != value) return std::nullopt;
    cursor = end;
  }
  if (cursor != text.size()) return std::nullopt;
  return bound;
}

}  // namespace xmera::prompts
