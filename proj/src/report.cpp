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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "xmera/harness.hpp"

namespace xmera {
namespace {

constexpr std::string_view kVersion = "0.1.0";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

struct Column {
  std::vector<double> entropy, perplexity, token_prob;

  void add(const UncertaintyTriple& t) {
    entropy.push_back(t.entropy);
    perplexity.push_back(t.perplexity);
    token_prob.push_back(t.token_prob);
  }
};

std::optional<double> gap(std::span<const double> correct,
                          std::span<const double> incorrect) {
  if (correct.empty() || incorrect.empty()) return std::nullopt;
  return std::abs(mean_of(correct) - mean_of(incorrect));
}

MetricStat stat(std::span<const double> samples, std::span<const double> runs) {
  return {mean_of(samples), standard_error(samples), standard_error(runs)};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  return out;
}

// Attacks and models in report order.
std::vector<std::string> models_of(const ExperimentReport& report) {
  std::set<std::string> s;
  for (const ReportCell& c : report.cells) s.insert(c.model);
  return {s.begin(), s.end()};
}

std::vector<AttackKind> attacks_of(const ExperimentReport& report) {
  std::set<AttackKind> s;
  for (const ReportCell& c : report.cells) s.insert(c.attack);
  return {s.begin(), s.end()};
}

std::vector<DatasetTag> tags_of(const ExperimentReport& report) {
  std::set<DatasetTag> s;
  for (const ReportCell& c : report.cells) s.insert(c.dataset_tag);
  return {s.begin(), s.end()};
}

const ReportCell* find_cell(const ExperimentReport& report, const std::string& model,
                            DatasetTag tag, AttackKind attack) {
  for (const ReportCell& c : report.cells) {
    if (c.model == model && c.dataset_tag == tag && c.attack == attack) return &c;
  }
  return nullptr;
}

}  // namespace

std::string_view version() { return kVersion; }

double standard_error(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

AccuracyAverage average_over_models(std::span<const double> accuracies) {
  if (accuracies.empty()) throw Error(Errc::kEmptyList, "no accuracies to average");
  AccuracyAverage out;
  out.mean_accuracy = mean_of(accuracies);
  out.asr = 1.0 - out.mean_accuracy;
  return out;
}

ExperimentReport summarize(std::span<const RunRecord> records) {
  if (records.empty()) throw Error(Errc::kEmptyList, "no records to summarize");
  using Key = std::tuple<std::string, DatasetTag, AttackKind>;

  struct Group {
    std::size_t n_samples = 0, n_correct = 0;
    Column samples, runs, correct, incorrect;
  };
  std::map<Key, Group> groups;
  for (const RunRecord& r : records) {
    groups[{r.model, r.dataset_tag, r.attack}].runs.add(r.triple);
  }
  for (const SampleOutcome& o : sample_outcomes(records)) {
    Group& g = groups[{o.model, o.dataset_tag, o.attack}];
    ++g.n_samples;
    g.samples.add(o.triple);
    if (o.correct) {
      ++g.n_correct;
      g.correct.add(o.triple);
    } else {
      g.incorrect.add(o.triple);
    }
  }

  ExperimentReport report;
  for (const auto& [key, g] : groups) {
    ReportCell c;
    std::tie(c.model, c.dataset_tag, c.attack) = key;
    c.n_samples = g.n_samples;
    c.n_runs = g.runs.entropy.size();
    c.n_correct = g.n_correct;
    c.accuracy = static_cast<double>(g.n_correct) / static_cast<double>(g.n_samples);
    c.asr = 1.0 - c.accuracy;
    c.accuracy_se =
        std::sqrt(c.accuracy * (1.0 - c.accuracy) / static_cast<double>(g.n_samples));
    c.entropy = stat(g.samples.entropy, g.runs.entropy);
    c.perplexity = stat(g.samples.perplexity, g.runs.perplexity);
    c.token_prob = stat(g.samples.token_prob, g.runs.token_prob);
    c.gap_entropy = gap(g.correct.entropy, g.incorrect.entropy);
    c.gap_perplexity = gap(g.correct.perplexity, g.incorrect.perplexity);
    c.gap_token_prob = gap(g.correct.token_prob, g.incorrect.token_prob);
    report.cells.push_back(std::move(c));
  }
  return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "model,dataset,attack,n_samples,n_runs,accuracy,asr,se_accuracy,"
         "H,PPL,TP,se_H_samples,se_PPL_samples,se_TP_samples,"
         "se_H_runs,se_PPL_runs,se_TP_runs\n";
  for (const ReportCell& c : report.cells) {
    out << c.model << ',' << to_string(c.dataset_tag) << ',' << to_string(c.attack)
        << ',' << c.n_samples << ',' << c.n_runs << ',' << num(c.accuracy) << ','
        << num(c.asr) << ',' << num(c.accuracy_se) << ',' << num(c.entropy.mean)
        << ',' << num(c.perplexity.mean) << ',' << num(c.token_prob.mean) << ','
        << num(c.entropy.se_samples) << ',' << num(c.perplexity.se_samples) << ','
        << num(c.token_prob.se_samples) << ',' << num(c.entropy.se_runs) << ','
        << num(c.perplexity.se_runs) << ',' << num(c.token_prob.se_runs) << '\n';
  }
}

void write_table1_csv(std::ostream& out, const ExperimentReport& report) {
  const auto models = models_of(report);
  out << "attack,dataset";
  for (const std::string& m : models) out << ',' << m << ',' << m << "_se";
  out << ",asr\n";
  for (AttackKind a : attacks_of(report)) {
    for (DatasetTag t : tags_of(report)) {
      std::vector<double> accs;
      std::string row = std::string(to_string(a)) + "," + std::string(to_string(t));
      for (const std::string& m : models) {
        const ReportCell* c = find_cell(report, m, t, a);
        if (c == nullptr) {
          row += ",,";
          continue;
        }
        accs.push_back(c->accuracy);
        row += "," + num(c->accuracy) + "," + num(c->accuracy_se);
      }
      if (accs.empty()) continue;
      out << row << ',' << num(average_over_models(accs).asr) << '\n';
    }
  }
}

void write_table2_csv(std::ostream& out, const ExperimentReport& report) {
  const auto models = models_of(report);
  const auto attacks = attacks_of(report);
  out << "dataset,metric";
  for (const std::string& m : models) {
    for (AttackKind a : attacks) out << ',' << m << ':' << to_string(a);
  }
  out << '\n';
  for (DatasetTag t : tags_of(report)) {
    for (int metric = 0; metric < 3; ++metric) {
      static constexpr const char* kNames[] = {"H", "PPL", "TP"};
      out << to_string(t) << ',' << kNames[metric];
      for (const std::string& m : models) {
        for (AttackKind a : attacks) {
          const ReportCell* c = find_cell(report, m, t, a);
          out << ',';
          if (c == nullptr) continue;
          const MetricStat& s =
              metric == 0 ? c->entropy : metric == 1 ? c->perplexity : c->token_prob;
          out << num(s.mean);
        }
      }
      out << '\n';
    }
  }
}

void write_gaps_csv(std::ostream& out, const ExperimentReport& report) {
  out << "model,dataset,attack,n_correct,n_incorrect,gap_H,gap_PPL,gap_TP\n";
  for (const ReportCell& c : report.cells) {
    out << c.model << ',' << to_string(c.dataset_tag) << ',' << to_string(c.attack)
        << ',' << c.n_correct << ',' << (c.n_samples - c.n_correct) << ','
        << opt_num(c.gap_entropy) << ',' << opt_num(c.gap_perplexity) << ','
        << opt_num(c.gap_token_prob) << '\n';
  }
}

void write_detectors_csv(std::ostream& out, const ExperimentReport& report) {
  out << "model,detector,auc\n";
  for (const DetectorAuc& d : report.detectors) {
    out << d.model << ',' << d.detector << ',' << opt_num(d.auc) << '\n';
  }
}

void write_report_files(const std::filesystem::path& dir,
                        const ExperimentReport& report) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "report.csv");
    write_report_csv(out, report);
  }
  {
    auto out = open_out(dir / "table1.csv");
    write_table1_csv(out, report);
  }
  {
    auto out = open_out(dir / "table2.csv");
    write_table2_csv(out, report);
  }
  {
    auto out = open_out(dir / "gaps.csv");
    write_gaps_csv(out, report);
  }
  if (!report.detectors.empty()) {
    auto out = open_out(dir / "detectors.csv");
    write_detectors_csv(out, report);
  }
}

void write_manifest(const std::filesystem::path& dir, std::uint64_t seed,
                    const std::map<std::string, std::string>& config) {
  std::string canonical;
  for (const auto& [k, v] : config) canonical += k + "=" + v + "\n";
  const nlohmann::json doc = {
      {"tool", "xmera"},
      {"version", kVersion},
      {"seed", seed},
      {"config", config},
      {"config_hash", sha256_hex(canonical)},
  };
  std::filesystem::create_directories(dir);
  auto out = open_out(dir / "manifest.json");
  out << doc.dump(2) << '\n';
}

}  // namespace xmera
