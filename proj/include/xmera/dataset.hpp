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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xmera/core.hpp"
#include "xmera/fact_checker.hpp"
#include "xmera/victim.hpp"

namespace xmera {

/// A question with its correct context c and factually adversarial context
/// c_adv, where c_adv is c with the gold answer swapped for a same-type
/// entity.
struct AdversarialRecord {
  std::string id;
  std::string question;
  std::string gold_answer;
  std::string correct_context;
  std::string adversarial_answer;
  std::string adversarial_context;
  std::string entity_type;
  DatasetTag dataset_tag = DatasetTag::kOther;
  bool correct_context_truthful = true;
  bool adversarial_context_truthful = false;

  bool operator==(const AdversarialRecord&) const = default;
};

/// Runs the containment checks: c contains the gold answer, c_adv contains
/// the adversarial answer and not the gold answer, labels are (true, false).
/// Throws kInvariantViolation.
void validate(const AdversarialRecord& record);

/// The record as an evaluation sample: c becomes the source fact and c_adv
/// the adversarial context.
QaSample to_sample(const AdversarialRecord& record);

FactChecker fact_checker_from(std::span<const AdversarialRecord> records);

/// Mock knowledge whose wrong answers and contexts come from the records.
MockKnowledge mock_knowledge_from(std::span<const AdversarialRecord> records);
/// Mock knowledge for bare QA samples; each wrong answer is the gold answer of
/// another sample chosen by a seeded hash.
MockKnowledge mock_knowledge_from(std::span<const QaSample> samples,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Builder

struct BuildOptions {
  int retries = 5;  // generation attempts per validation loop
  int concurrency = 1;
  std::uint64_t seed = 0;
};

/// One sentence stating `answer` to `question`, validated by normalized
/// containment. Throws kGenerationFailed after opts.retries attempts and
/// kInvalidArgument on an empty answer.
std::string build_correct_context(std::string_view question,
                                  std::string_view answer, const Victim& generator,
                                  const BuildOptions& opts = {});

/// A different entity of the same type as `answer` (normalized inequality
/// enforced). Throws kGenerationFailed after opts.retries attempts.
std::string swap_entity(std::string_view answer, const Victim& generator,
                        const BuildOptions& opts = {});

/// Replaces every occurrence of `answer` in `context` by `replacement`.
/// Exact byte matches are used when present; otherwise the shortest spans
/// whose normalized form equals the normalized answer are replaced and the
/// surrounding bytes are kept. Throws kAnswerNotInContext.
std::string assemble_adversarial(std::string_view context, std::string_view answer,
                                 std::string_view replacement);

AdversarialRecord build_record(const QaSample& sample, const Victim& generator,
                               const BuildOptions& opts = {});

struct BuildFailure {
  std::string id;
  std::string reason;
};

struct BuildResult {
  std::vector<AdversarialRecord> records;  // input order
  std::vector<BuildFailure> failures;
};

/// Builds records with up to opts.concurrency generation calls in flight.
/// Output order follows input order regardless of completion order.
BuildResult build_dataset(std::span<const QaSample> samples,
                          const Victim& generator, const BuildOptions& opts = {});

// ---------------------------------------------------------------------------
// JSON-lines I/O

struct InvalidLine {
  std::size_t line_no = 0;
  std::string reason;
};

template <typename T>
struct LoadResult {
  std::vector<T> records;
  std::vector<InvalidLine> invalid;  // only populated with skip_invalid
};

struct LoadOptions {
  bool skip_invalid = false;
};

std::string to_json_line(const QaSample& sample);
std::string to_json_line(const AdversarialRecord& record);
/// Parse one line; throw SchemaError carrying `line_no`.
QaSample qa_from_json_line(std::string_view line, std::size_t line_no);
AdversarialRecord adversarial_from_json_line(std::string_view line,
                                             std::size_t line_no);

/// Throws kIoError when the file cannot be opened and the first SchemaError
/// unless skip_invalid is set. Blank lines are ignored.
LoadResult<QaSample> load_qa(const std::filesystem::path& path,
                             const LoadOptions& opts = {});
LoadResult<AdversarialRecord> load_adversarial(const std::filesystem::path& path,
                                               const LoadOptions& opts = {});

void write_qa(const std::filesystem::path& path, std::span<const QaSample> samples);
void write_adversarial(const std::filesystem::path& path,
                       std::span<const AdversarialRecord> records);

}  // namespace xmera
