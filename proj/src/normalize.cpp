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

#include <cctype>
#include <string>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "xmera/core.hpp"

namespace xmera {
namespace {

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

// Drops outer spaces and ASCII punctuation until neither remains at an edge.
void strip_outer(std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && (s[begin] == ' ' || is_ascii_punct(s[begin]))) {
    ++begin;
  }
  while (end > begin && (s[end - 1] == ' ' || is_ascii_punct(s[end - 1]))) {
    --end;
  }
  s = s.substr(begin, end - begin);
}

}  // namespace

std::string normalize(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(Errc::kInvalidArgument, "ICU NFKC normalizer unavailable");
  }
  icu::UnicodeString folded = nfkc->normalize(
      icu::UnicodeString::fromUTF8(
          icu::StringPiece(text.data(), static_cast<int32_t>(text.size()))),
      status);
  folded.foldCase();
  // Case folding can leave a string that is no longer NFKC-closed.
  folded = nfkc->normalize(folded, status);
  if (U_FAILURE(status)) {
    throw Error(Errc::kInvalidArgument, "normalization failed");
  }

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < folded.length();) {
    const UChar32 c = folded.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !collapsed.isEmpty()) collapsed.append(u' ');
    pending_space = false;
    collapsed.append(c);
  }

  std::string out;
  collapsed.toUTF8String(out);
  strip_outer(out);
  return out;
}

Verdict oracle_check(std::string_view gold, std::string_view model_answer) {
  const std::string needle = normalize(gold);
  if (needle.empty()) {
    throw Error(Errc::kEmptyGold, "gold answer normalizes to empty");
  }
  const std::string haystack = normalize(model_answer);
  const std::size_t pos = haystack.find(needle);
  if (pos == std::string::npos) return Verdict{};
  return Verdict{true, std::make_pair(pos, pos + needle.size())};
}

}  // namespace xmera
