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

#include <stdexcept>
#include <string>
#include <string_view>

namespace xmera {

enum class Errc {
  kInvalidArgument,
  // core
  kEmptyGold,
  kEmptyList,
  // attacks
  kEmptyQuery,
  kMissingAdversarialContext,
  kContextNotFalse,
  kPoolTooSmall,
  // uncertainty
  kEmptyTrace,
  kMalformedLogprob,
  // victim
  kTimeout,
  kAuthError,
  kMalformedProviderResponse,
  kRateLimited,
  kUnknownQuestion,
  kUpstreamError,
  // detector
  kSingleClass,
  kInsufficientData,
  kFeatureDimMismatch,
  kTooFewPerClass,
  kUnsupportedFormat,
  // dataset
  kGenerationFailed,
  kAnswerNotInContext,
  kIoError,
  kSchemaError,
  kInvariantViolation,
  // proxy
  kBindError,
};

std::string_view to_string(Errc code);

/// Exception type for every recoverable failure in the library. Callers
/// branch on code(); what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Schema failure while reading a line-oriented file.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line_no, const std::string& reason)
      : Error(Errc::kSchemaError,
              "line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no),
        reason_(reason) {}

  std::size_t line_no() const noexcept { return line_no_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_no_;
  std::string reason_;
};

}  // namespace xmera
