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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xmera/attacks.hpp"
#include "xmera/core.hpp"
#include "xmera/detector.hpp"
#include "xmera/fact_checker.hpp"
#include "xmera/uncertainty.hpp"
#include "xmera/victim.hpp"

namespace xmera {

// ---------------------------------------------------------------------------
// Records

/// One answered query: a single run of a (possibly attacked) sample.
struct RunRecord {
  std::string model;
  std::string sample_id;
  DatasetTag dataset_tag = DatasetTag::kOther;
  AttackKind attack = AttackKind::kNone;
  int run_index = 0;
  std::string perturbed_query;
  std::string answer;
  Verdict verdict;
  UncertaintyTriple triple;
  std::string trace_digest;  // sha256 of the serialized trace

  bool operator==(const RunRecord&) const = default;
};

std::string to_json_line(const RunRecord& record);
RunRecord run_record_from_json_line(std::string_view line, std::size_t line_no);

void write_records(const std::filesystem::path& path,
                   std::span<const RunRecord> records);
/// Throws kIoError or SchemaError(line_no, ...). Blank lines are skipped.
std::vector<RunRecord> load_records(const std::filesystem::path& path);

/// Hex sha256 over the answer and every position's tokens and logprobs.
std::string trace_digest(const GenerationTrace& trace);

/// Sample-level result: majority answer over runs and aggregated triple.
struct SampleOutcome {
  std::string model;
  std::string sample_id;
  DatasetTag dataset_tag = DatasetTag::kOther;
  AttackKind attack = AttackKind::kNone;
  std::string majority_answer;
  bool correct = false;
  UncertaintyTriple triple;
  std::size_t runs = 0;
};

/// Groups records by (model, attack, sample_id), ordered by that key, with
/// runs ordered by run_index. Correctness is re-derived from the majority
/// answer against the records' verdicts: a sample is correct when its
/// majority answer's run verdict is correct.
std::vector<SampleOutcome> sample_outcomes(std::span<const RunRecord> records);

// ---------------------------------------------------------------------------
// Running

struct RunOptions {
  int runs = 10;
  std::uint64_t seed = 0;
  int concurrency = 1;
  double failure_threshold = 0.05;
  /// When set, records are appended per finished sample and samples already
  /// complete in the file are not re-queried.
  std::optional<std::filesystem::path> checkpoint;
};

struct SampleFailure {
  std::string sample_id;
  std::string reason;
};

struct AttackRun {
  AttackKind kind = AttackKind::kNone;
  std::vector<RunRecord> records;  // sample input order, then run_index
  std::vector<SampleFailure> failures;
  std::size_t attempted = 0;

  double failure_fraction() const;
  bool failed(double threshold) const { return failure_fraction() > threshold; }
};

/// Per-call seed for one run of one sample under one attack.
std::uint64_t call_seed(std::uint64_t seed, std::string_view sample_id,
                        AttackKind kind, int run_index);

/// Runs every sample `options.runs` times under `kind`. The perturbed query
/// is built once per sample; gamma draws with a seed keyed by the sample id.
/// Per-sample errors are collected and the run continues.
AttackRun run_attack(AttackKind kind, std::span<const QaSample> samples,
                     std::span<const QaSample> pool, const FactChecker* checker,
                     const Victim& victim, const RunOptions& options);

struct TagAccuracy {
  std::size_t total = 0;
  std::size_t kept = 0;
  double accuracy() const {
    return total == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(total);
  }
};

struct BaselineResult {
  std::vector<QaSample> kept;  // input order
  AttackRun run;               // the unattacked runs of every sample
  std::map<DatasetTag, TagAccuracy> per_tag;
};

/// Keeps the samples whose unattacked majority answer passes the oracle.
BaselineResult baseline_filter(std::span<const QaSample> samples, const Victim& victim,
                               const RunOptions& options);

// ---------------------------------------------------------------------------
// Reporting

struct MetricStat {
  double mean = 0.0;
  double se_samples = 0.0;  // over sample-level values
  double se_runs = 0.0;     // over individual runs
};

struct ReportCell {
  std::string model;
  DatasetTag dataset_tag = DatasetTag::kOther;
  AttackKind attack = AttackKind::kNone;
  std::size_t n_samples = 0;
  std::size_t n_runs = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  double asr = 0.0;
  double accuracy_se = 0.0;  // binomial, over samples
  MetricStat entropy;
  MetricStat perplexity;
  MetricStat token_prob;
  /// |mean(correct) - mean(incorrect)| over sample-level values; absent
  /// when either group is empty.
  std::optional<double> gap_entropy;
  std::optional<double> gap_perplexity;
  std::optional<double> gap_token_prob;
};

struct DetectorAuc {
  std::string model;
  std::string detector;
  std::optional<double> auc;  // absent when the detector was skipped
};

struct ExperimentReport {
  std::vector<ReportCell> cells;  // ordered by (model, tag, attack)
  std::vector<DetectorAuc> detectors;
};

/// Throws kEmptyList on no records.
ExperimentReport summarize(std::span<const RunRecord> records);

/// Sample standard deviation / sqrt(n); 0 for fewer than two values.
double standard_error(std::span<const double> values);

struct AccuracyAverage {
  double mean_accuracy = 0.0;
  double asr = 0.0;
};

/// Mean of per-model accuracies and the matching ASR (1 - mean).
AccuracyAverage average_over_models(std::span<const double> accuracies);

/// Long-form report: one row per cell.
void write_report_csv(std::ostream& out, const ExperimentReport& report);
/// Accuracy per (attack, dataset) with one column per model and a trailing
/// ASR column averaged over models.
void write_table1_csv(std::ostream& out, const ExperimentReport& report);
/// Mean H/PPL/TP per (dataset, metric) with one column per (model, attack).
void write_table2_csv(std::ostream& out, const ExperimentReport& report);
/// Correct-vs-incorrect gaps per cell; absent gaps are left empty.
void write_gaps_csv(std::ostream& out, const ExperimentReport& report);
void write_detectors_csv(std::ostream& out, const ExperimentReport& report);

/// Writes report.csv, table1.csv, table2.csv, gaps.csv and, when detector
/// results exist, detectors.csv into `dir`.
void write_report_files(const std::filesystem::path& dir,
                        const ExperimentReport& report);

// ---------------------------------------------------------------------------
// Manifest

/// {"tool", "version", "seed", "config", "config_hash"}; no timestamps so
/// repeated runs are byte-identical.
void write_manifest(const std::filesystem::path& dir, std::uint64_t seed,
                    const std::map<std::string, std::string>& config);

std::string_view version();

// ---------------------------------------------------------------------------
// Mock experiment

struct ExperimentConfig {
  std::size_t n_samples = 1000;
  int runs = 10;
  std::uint64_t seed = 1;
  double known_fraction = 1.0;
  MockKnowledge mock;  // entries are generated; probabilities are read here
  std::vector<AttackKind> attacks{AttackKind::kAlpha, AttackKind::kBeta,
                                  AttackKind::kGamma};
  bool train_detectors = true;
  DetectorOptions detector;
  int concurrency = 1;
};

struct ExperimentResult {
  std::vector<QaSample> samples;  // with both contexts
  BaselineResult baseline;
  std::vector<AttackRun> attacks;
  std::vector<RunRecord> records;  // baseline then attacks, kept samples only
  std::vector<DetectorReport> detectors;
  ExperimentReport report;
};

/// Synthetic corpus -> adversarial dataset built by the mock -> baseline
/// filter -> attack runs -> report -> detectors. Deterministic in the config.
ExperimentResult run_mock_experiment(const ExperimentConfig& config);

/// Sample-level detector inputs from records (one per sample and attack).
std::vector<DetectorInput> detector_inputs(std::span<const RunRecord> records);

/// Writes records.jsonl, the report files, one model and ROC file per
/// trained detector, and manifest.json.
void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result,
                      const ExperimentConfig& config);

std::map<std::string, std::string> describe(const ExperimentConfig& config);

}  // namespace xmera
