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

#include "xmera/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "xmera/prompts.hpp"

namespace xmera {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

bool contains_normalized(std::string_view haystack, std::string_view needle) {
  const std::string n = normalize(needle);
  return !n.empty() && normalize(haystack).find(n) != std::string::npos;
}

bool is_boundary(std::string_view s, std::size_t i) {
  return i == 0 || i >= s.size() ||
         (static_cast<unsigned char>(s[i]) & 0xC0) != 0x80;
}

// Leftmost, then tightest, span [begin, end) of `text` at or after `from`
// whose normalized form equals `target`.
std::optional<std::pair<std::size_t, std::size_t>> find_normalized(
    std::string_view text, std::string_view target, std::size_t from,
    std::size_t max_span) {
  for (std::size_t s = from; s < text.size(); ++s) {
    if (!is_boundary(text, s)) continue;
    for (std::size_t e = s + 1; e <= text.size() && e - s <= max_span; ++e) {
      if (!is_boundary(text, e)) continue;
      if (normalize(text.substr(s, e - s)) != target) continue;
      // Drop leading bytes that normalization would strip anyway.
      std::size_t tight = s;
      for (std::size_t t = s + 1; t < e; ++t) {
        if (!is_boundary(text, t)) continue;
        if (normalize(text.substr(t, e - t)) != target) break;
        tight = t;
      }
      return std::make_pair(tight, e);
    }
  }
  return std::nullopt;
}

const json& field(const json& doc, const char* name, std::size_t line_no) {
  if (!doc.contains(name)) {
    throw SchemaError(line_no, std::string("missing field '") + name + "'");
  }
  return doc.at(name);
}

std::string string_field(const json& doc, const char* name, std::size_t line_no) {
  const json& v = field(doc, name, line_no);
  if (!v.is_string()) {
    throw SchemaError(line_no, std::string("field '") + name + "' is not a string");
  }
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& doc, const char* name,
                                           std::size_t line_no) {
  if (!doc.contains(name) || doc.at(name).is_null()) return std::nullopt;
  return string_field(doc, name, line_no);
}

json parse_line(std::string_view line, std::size_t line_no) {
  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError(line_no, "not a JSON object");
  }
  return doc;
}

DatasetTag tag_field(const json& doc, std::size_t line_no) {
  try {
    return parse_dataset_tag(string_field(doc, "dataset_tag", line_no));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(line_no, e.what());
  }
}

template <typename T, typename Parse>
LoadResult<T> load_lines(const std::filesystem::path& path, const LoadOptions& opts,
                         Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot read " + path.string());
  LoadResult<T> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    try {
      result.records.push_back(parse(line, line_no));
    } catch (const SchemaError& e) {
      if (!opts.skip_invalid) throw;
      result.invalid.push_back({e.line_no(), e.reason()});
    }
  }
  return result;
}

template <typename T>
void write_lines(const std::filesystem::path& path, std::span<const T> items) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  for (const T& item : items) out << to_json_line(item) << '\n';
  if (!out) throw Error(Errc::kIoError, "write failed for " + path.string());
}

}  // namespace

void validate(const AdversarialRecord& r) {
  const auto fail = [&](const std::string& why) {
    throw Error(Errc::kInvariantViolation, "record '" + r.id + "': " + why);
  };
  if (normalize(r.question).empty()) fail("empty question");
  if (normalize(r.gold_answer).empty()) fail("empty gold answer");
  if (normalize(r.adversarial_answer).empty()) fail("empty adversarial answer");
  if (!contains_normalized(r.correct_context, r.gold_answer)) {
    fail("correct context does not contain the gold answer");
  }
  if (!contains_normalized(r.adversarial_context, r.adversarial_answer)) {
    fail("adversarial context does not contain the adversarial answer");
  }
  if (contains_normalized(r.adversarial_context, r.gold_answer)) {
    fail("adversarial context still contains the gold answer");
  }
  if (!r.correct_context_truthful || r.adversarial_context_truthful) {
    fail("truth labels must be (true, false)");
  }
}

QaSample to_sample(const AdversarialRecord& r) {
  return QaSample{r.id,
                  r.question,
                  r.gold_answer,
                  r.correct_context,
                  r.adversarial_context,
                  r.dataset_tag};
}

FactChecker fact_checker_from(std::span<const AdversarialRecord> records) {
  FactChecker checker;
  for (const AdversarialRecord& r : records) {
    checker.add(r.correct_context, r.correct_context_truthful);
    checker.add(r.adversarial_context, r.adversarial_context_truthful);
  }
  return checker;
}

MockKnowledge mock_knowledge_from(std::span<const AdversarialRecord> records) {
  MockKnowledge kb;
  for (const AdversarialRecord& r : records) {
    kb.entries.push_back(
        {r.question, r.gold_answer, r.adversarial_answer, r.correct_context, true});
  }
  return kb;
}

MockKnowledge mock_knowledge_from(std::span<const QaSample> samples,
                                  std::uint64_t seed) {
  MockKnowledge kb;
  kb.seed = seed;
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    const QaSample& s = samples[i];
    std::string wrong = "not " + s.gold_answer;
    if (n > 1) {
      // Walk from a hashed start to the first sample with a different answer.
      const std::size_t start = hash64(s.id, seed) % n;
      for (std::size_t step = 0; step < n; ++step) {
        const QaSample& other = samples[(start + step) % n];
        if (!contains_normalized(other.gold_answer, s.gold_answer) &&
            !contains_normalized(s.gold_answer, other.gold_answer)) {
          wrong = other.gold_answer;
          break;
        }
      }
    }
    kb.entries.push_back(
        {s.question, s.gold_answer, wrong, s.source_fact.value_or(""), true});
  }
  return kb;
}

std::string build_correct_context(std::string_view question, std::string_view answer,
                                  const Victim& generator, const BuildOptions& opts) {
  if (normalize(answer).empty()) {
    throw Error(Errc::kInvalidArgument, "answer must be non-empty");
  }
  const std::string prompt =
      prompts::render(prompts::correct_context_template(), question, answer);
  for (int attempt = 0; attempt < opts.retries; ++attempt) {
    const std::string text = trim(
        generator.generate(prompt, derive_seed(opts.seed, "context-" + std::to_string(attempt)))
            .answer_text);
    if (oracle_check(answer, text).correct) return text;
  }
  throw Error(Errc::kGenerationFailed,
              "no context containing '" + std::string(answer) + "' after " +
                  std::to_string(opts.retries) + " attempts");
}

std::string swap_entity(std::string_view answer, const Victim& generator,
                        const BuildOptions& opts) {
  const std::string original = normalize(answer);
  if (original.empty()) throw Error(Errc::kInvalidArgument, "answer must be non-empty");
  const std::string prompt =
      prompts::render(prompts::adversarial_answer_template(), "", answer);
  for (int attempt = 0; attempt < opts.retries; ++attempt) {
    std::string candidate = trim(
        generator.generate(prompt, derive_seed(opts.seed, "swap-" + std::to_string(attempt)))
            .answer_text);
    const std::string norm = normalize(candidate);
    if (!norm.empty() && norm != original) return candidate;
  }
  throw Error(Errc::kGenerationFailed,
              "no entity different from '" + std::string(answer) + "' after " +
                  std::to_string(opts.retries) + " attempts");
}

std::string assemble_adversarial(std::string_view context, std::string_view answer,
                                 std::string_view replacement) {
  if (answer.empty() || !oracle_check(answer, context).correct) {
    throw Error(Errc::kAnswerNotInContext,
                "'" + std::string(answer) + "' does not occur in the context");
  }
  std::string out;
  if (context.find(answer) != std::string_view::npos) {
    std::size_t pos = 0;
    for (std::size_t hit; (hit = context.find(answer, pos)) != std::string_view::npos;
         pos = hit + answer.size()) {
      out.append(context.substr(pos, hit - pos));
      out.append(replacement);
    }
    out.append(context.substr(pos));
    return out;
  }
  const std::string target = normalize(answer);
  const std::size_t max_span = 4 * answer.size() + 16;
  std::size_t pos = 0;
  while (auto span = find_normalized(context, target, pos, max_span)) {
    out.append(context.substr(pos, span->first - pos));
    out.append(replacement);
    pos = span->second;
  }
  out.append(context.substr(pos));
  return out;
}

AdversarialRecord build_record(const QaSample& sample, const Victim& generator,
                               const BuildOptions& opts) {
  BuildOptions local = opts;
  local.seed = derive_seed(opts.seed, sample.id);
  AdversarialRecord r;
  r.id = sample.id;
  r.question = sample.question;
  r.gold_answer = sample.gold_answer;
  r.dataset_tag = sample.dataset_tag;
  r.correct_context =
      build_correct_context(sample.question, sample.gold_answer, generator, local);
  r.adversarial_answer = swap_entity(sample.gold_answer, generator, local);
  r.adversarial_context =
      assemble_adversarial(r.correct_context, sample.gold_answer, r.adversarial_answer);
  try {
    validate(r);
  } catch (const Error& e) {
    throw Error(Errc::kGenerationFailed, e.what());
  }
  return r;
}

BuildResult build_dataset(std::span<const QaSample> samples, const Victim& generator,
                          const BuildOptions& opts) {
  std::vector<std::optional<AdversarialRecord>> slots(samples.size());
  std::vector<std::string> errors(samples.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < samples.size(); i = next++) {
      try {
        slots[i] = build_record(samples[i], generator, opts);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(opts.concurrency, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  BuildResult result;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (slots[i]) {
      result.records.push_back(std::move(*slots[i]));
    } else {
      result.failures.push_back({samples[i].id, errors[i]});
    }
  }
  return result;
}

std::string to_json_line(const QaSample& s) {
  json doc = {{"id", s.id},
              {"question", s.question},
              {"gold_answer", s.gold_answer},
              {"dataset_tag", to_string(s.dataset_tag)}};
  if (s.source_fact) doc["source_fact"] = *s.source_fact;
  if (s.adversarial_context) doc["adversarial_context"] = *s.adversarial_context;
  return doc.dump();
}

std::string to_json_line(const AdversarialRecord& r) {
  json doc = {{"id", r.id},
              {"question", r.question},
              {"gold_answer", r.gold_answer},
              {"correct_context", r.correct_context},
              {"adversarial_answer", r.adversarial_answer},
              {"adversarial_context", r.adversarial_context},
              {"entity_type", r.entity_type},
              {"dataset_tag", to_string(r.dataset_tag)},
              {"truthful",
               {{"correct_context", r.correct_context_truthful},
                {"adversarial_context", r.adversarial_context_truthful}}}};
  return doc.dump();
}

QaSample qa_from_json_line(std::string_view line, std::size_t line_no) {
  const json doc = parse_line(line, line_no);
  QaSample s;
  s.id = string_field(doc, "id", line_no);
  s.question = string_field(doc, "question", line_no);
  s.gold_answer = string_field(doc, "gold_answer", line_no);
  s.dataset_tag = tag_field(doc, line_no);
  s.source_fact = optional_string(doc, "source_fact", line_no);
  s.adversarial_context = optional_string(doc, "adversarial_context", line_no);
  try {
    validate(s);
  } catch (const Error& e) {
    throw SchemaError(line_no, e.what());
  }
  return s;
}

AdversarialRecord adversarial_from_json_line(std::string_view line,
                                             std::size_t line_no) {
  const json doc = parse_line(line, line_no);
  AdversarialRecord r;
  r.id = string_field(doc, "id", line_no);
  r.question = string_field(doc, "question", line_no);
  r.gold_answer = string_field(doc, "gold_answer", line_no);
  r.correct_context = string_field(doc, "correct_context", line_no);
  r.adversarial_answer = string_field(doc, "adversarial_answer", line_no);
  r.adversarial_context = string_field(doc, "adversarial_context", line_no);
  r.entity_type = optional_string(doc, "entity_type", line_no).value_or("");
  r.dataset_tag = tag_field(doc, line_no);
  const json& truthful = field(doc, "truthful", line_no);
  if (!truthful.is_object() || !truthful.contains("correct_context") ||
      !truthful.contains("adversarial_context") ||
      !truthful["correct_context"].is_boolean() ||
      !truthful["adversarial_context"].is_boolean()) {
    throw SchemaError(line_no, "field 'truthful' must hold two booleans");
  }
  r.correct_context_truthful = truthful["correct_context"].get<bool>();
  r.adversarial_context_truthful = truthful["adversarial_context"].get<bool>();
  try {
    validate(r);
  } catch (const Error& e) {
    throw SchemaError(line_no, e.what());
  }
  return r;
}

LoadResult<QaSample> load_qa(const std::filesystem::path& path,
                             const LoadOptions& opts) {
  return load_lines<QaSample>(path, opts, qa_from_json_line);
}

LoadResult<AdversarialRecord> load_adversarial(const std::filesystem::path& path,
                                               const LoadOptions& opts) {
  return load_lines<AdversarialRecord>(path, opts, adversarial_from_json_line);
}

void write_qa(const std::filesystem::path& path, std::span<const QaSample> samples) {
  write_lines(path, samples);
}

void write_adversarial(const std::filesystem::path& path,
                       std::span<const AdversarialRecord> records) {
  write_lines(path, records);
}

}  // namespace xmera
