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

#include "xmera/harness.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "xmera/dataset.hpp"
#include "xmera/synthetic.hpp"

namespace xmera {
namespace {

using nlohmann::json;

template <typename T>
T get_field(const json& doc, const char* name, std::size_t line_no) {
  if (!doc.contains(name)) {
    throw SchemaError(line_no, std::string("missing field '") + name + "'");
  }
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(line_no, std::string("field '") + name + "': " + e.what());
  }
}

struct SampleResult {
  std::vector<RunRecord> records;
  std::optional<SampleFailure> failure;
};

SampleResult run_sample(AttackKind kind, const QaSample& sample,
                        std::span<const QaSample> pool, const FactChecker* checker,
                        const Victim& victim, const RunOptions& options) {
  SampleResult out;
  try {
    const AttackInputs inputs{pool, checker,
                              derive_seed(options.seed, "gamma:" + sample.id)};
    const AttackedQuery query = apply(kind, sample, inputs);
    const std::string model = victim.model_name();
    for (int r = 0; r < options.runs; ++r) {
      const GenerationTrace trace =
          victim.generate(query.perturbed, call_seed(options.seed, sample.id, kind, r));
      validate(trace);
      RunRecord rec;
      rec.model = model;
      rec.sample_id = sample.id;
      rec.dataset_tag = sample.dataset_tag;
      rec.attack = kind;
      rec.run_index = r;
      rec.perturbed_query = query.perturbed;
      rec.answer = trace.answer_text;
      rec.verdict = oracle_check(sample.gold_answer, trace.answer_text);
      rec.triple = measure(trace);
      rec.trace_digest = trace_digest(trace);
      out.records.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    out.records.clear();
    out.failure = SampleFailure{sample.id, e.what()};
  }
  return out;
}

// Records already in the checkpoint, keyed by sample id, for samples whose
// runs are complete.
std::map<std::string, std::vector<RunRecord>> completed_samples(
    const std::filesystem::path& path, AttackKind kind, const std::string& model,
    int runs) {
  std::map<std::string, std::vector<RunRecord>> by_sample;
  if (!std::filesystem::exists(path)) return by_sample;
  for (RunRecord& rec : load_records(path)) {
    if (rec.attack != kind || rec.model != model) continue;
    by_sample[rec.sample_id].push_back(std::move(rec));
  }
  for (auto it = by_sample.begin(); it != by_sample.end();) {
    std::vector<RunRecord>& recs = it->second;
    std::sort(recs.begin(), recs.end(), [](const RunRecord& a, const RunRecord& b) {
      return a.run_index < b.run_index;
    });
    bool complete = static_cast<int>(recs.size()) == runs;
    for (int r = 0; complete && r < runs; ++r) complete = recs[r].run_index == r;
    it = complete ? std::next(it) : by_sample.erase(it);
  }
  return by_sample;
}

}  // namespace

// ---------------------------------------------------------------------------
// Records

std::string trace_digest(const GenerationTrace& trace) {
  json positions = json::array();
  for (const TokenPosition& p : trace.positions) {
    json topk = json::array();
    for (const TokenLogprob& t : p.topk) topk.push_back({t.token, t.logprob});
    positions.push_back({p.chosen_token, p.chosen_logprob, std::move(topk)});
  }
  const json doc = {trace.answer_text, std::move(positions)};
  return sha256_hex(doc.dump());
}

std::string to_json_line(const RunRecord& record) {
  json verdict = {{"correct", record.verdict.correct}, {"matched_span", nullptr}};
  if (record.verdict.matched_span) {
    verdict["matched_span"] = {record.verdict.matched_span->first,
                               record.verdict.matched_span->second};
  }
  const json doc = {
      {"model", record.model},
      {"sample_id", record.sample_id},
      {"dataset_tag", to_string(record.dataset_tag)},
      {"attack", to_string(record.attack)},
      {"run_index", record.run_index},
      {"perturbed_query", record.perturbed_query},
      {"answer", record.answer},
      {"verdict", std::move(verdict)},
      {"triple",
       {{"entropy", record.triple.entropy},
        {"perplexity", record.triple.perplexity},
        {"token_prob", record.triple.token_prob}}},
      {"trace_digest", record.trace_digest},
  };
  return doc.dump();
}

RunRecord run_record_from_json_line(std::string_view line, std::size_t line_no) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError(line_no, "record is not an object");
  RunRecord rec;
  rec.model = get_field<std::string>(doc, "model", line_no);
  rec.sample_id = get_field<std::string>(doc, "sample_id", line_no);
  rec.perturbed_query = get_field<std::string>(doc, "perturbed_query", line_no);
  rec.answer = get_field<std::string>(doc, "answer", line_no);
  rec.run_index = get_field<int>(doc, "run_index", line_no);
  rec.trace_digest = get_field<std::string>(doc, "trace_digest", line_no);
  try {
    rec.dataset_tag =
        parse_dataset_tag(get_field<std::string>(doc, "dataset_tag", line_no));
    rec.attack = parse_attack_kind(get_field<std::string>(doc, "attack", line_no));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(line_no, e.what());
  }
  const json verdict = get_field<json>(doc, "verdict", line_no);
  rec.verdict.correct = get_field<bool>(verdict, "correct", line_no);
  if (verdict.contains("matched_span") && !verdict["matched_span"].is_null()) {
    const auto span = verdict["matched_span"].get<std::vector<std::size_t>>();
    if (span.size() != 2) throw SchemaError(line_no, "matched_span needs two values");
    rec.verdict.matched_span = std::make_pair(span[0], span[1]);
  }
  const json triple = get_field<json>(doc, "triple", line_no);
  rec.triple.entropy = get_field<double>(triple, "entropy", line_no);
  rec.triple.perplexity = get_field<double>(triple, "perplexity", line_no);
  rec.triple.token_prob = get_field<double>(triple, "token_prob", line_no);
  if (rec.run_index < 0) throw SchemaError(line_no, "negative run_index");
  return rec;
}

void write_records(const std::filesystem::path& path,
                   std::span<const RunRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  for (const RunRecord& r : records) out << to_json_line(r) << '\n';
  if (!out) throw Error(Errc::kIoError, "write failed: " + path.string());
}

std::vector<RunRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot read " + path.string());
  std::vector<RunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(run_record_from_json_line(line, line_no));
  }
  return out;
}

std::vector<SampleOutcome> sample_outcomes(std::span<const RunRecord> records) {
  using Key = std::tuple<std::string, AttackKind, std::string>;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records) {
    groups[{r.model, r.attack, r.sample_id}].push_back(&r);
  }
  std::vector<SampleOutcome> out;
  out.reserve(groups.size());
  for (auto& [key, recs] : groups) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const RunRecord* a, const RunRecord* b) {
                       return a->run_index < b->run_index;
                     });
    std::vector<std::string> answers;
    std::vector<UncertaintyTriple> triples;
    for (const RunRecord* r : recs) {
      answers.push_back(r->answer);
      triples.push_back(r->triple);
    }
    SampleOutcome o;
    o.model = std::get<0>(key);
    o.attack = std::get<1>(key);
    o.sample_id = std::get<2>(key);
    o.dataset_tag = recs.front()->dataset_tag;
    o.majority_answer = majority_answer(answers);
    for (const RunRecord* r : recs) {
      if (r->answer == o.majority_answer) {
        o.correct = r->verdict.correct;
        break;
      }
    }
    o.triple = aggregate_runs(triples);
    o.runs = recs.size();
    out.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Running

double AttackRun::failure_fraction() const {
  return attempted == 0 ? 0.0
                        : static_cast<double>(failures.size()) /
                              static_cast<double>(attempted);
}

std::uint64_t call_seed(std::uint64_t seed, std::string_view sample_id,
                        AttackKind kind, int run_index) {
  std::string key(sample_id);
  key += '\x1f';
  key += to_string(kind);
  return derive_seed(derive_seed(seed, key), static_cast<std::uint64_t>(run_index));
}

AttackRun run_attack(AttackKind kind, std::span<const QaSample> samples,
                     std::span<const QaSample> pool, const FactChecker* checker,
                     const Victim& victim, const RunOptions& options) {
  if (options.runs < 1) throw Error(Errc::kInvalidArgument, "runs must be >= 1");
  if (options.concurrency < 1) {
    throw Error(Errc::kInvalidArgument, "concurrency must be >= 1");
  }
  AttackRun run;
  run.kind = kind;
  run.attempted = samples.size();

  std::map<std::string, std::vector<RunRecord>> done;
  std::ofstream checkpoint;
  if (options.checkpoint) {
    done = completed_samples(*options.checkpoint, kind, victim.model_name(),
                             options.runs);
    checkpoint.open(*options.checkpoint, std::ios::binary | std::ios::app);
    if (!checkpoint) {
      throw Error(Errc::kIoError, "cannot open checkpoint " +
                                      options.checkpoint->string());
    }
  }

  std::vector<std::optional<SampleResult>> slots(samples.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (auto it = done.find(samples[i].id); it != done.end()) {
      slots[i] = SampleResult{it->second, std::nullopt};
    } else {
      todo.push_back(i);
    }
  }

  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < todo.size();) {
      const std::size_t i = todo[t];
      SampleResult result = run_sample(kind, samples[i], pool, checker, victim, options);
      {
        std::lock_guard lock(mu);
        slots[i] = std::move(result);
      }
      ready.notify_all();
    }
  };

  std::vector<std::jthread> workers;
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(options.concurrency), todo.size());
  for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);

  // Single writer, in input order.
  std::set<std::size_t> fresh(todo.begin(), todo.end());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SampleResult result;
    {
      std::unique_lock lock(mu);
      ready.wait(lock, [&] { return slots[i].has_value(); });
      result = std::move(*slots[i]);
      slots[i].reset();
    }
    if (result.failure) {
      run.failures.push_back(std::move(*result.failure));
      continue;
    }
    if (checkpoint.is_open() && fresh.contains(i)) {
      for (const RunRecord& r : result.records) checkpoint << to_json_line(r) << '\n';
      checkpoint.flush();
    }
    for (RunRecord& r : result.records) run.records.push_back(std::move(r));
  }
  return run;
}

BaselineResult baseline_filter(std::span<const QaSample> samples, const Victim& victim,
                               const RunOptions& options) {
  BaselineResult out;
  out.run = run_attack(AttackKind::kNone, samples, {}, nullptr, victim, options);
  std::map<std::string, bool> correct;
  for (const SampleOutcome& o : sample_outcomes(out.run.records)) {
    correct[o.sample_id] = o.correct;
  }
  for (const QaSample& s : samples) {
    TagAccuracy& tag = out.per_tag[s.dataset_tag];
    ++tag.total;
    if (auto it = correct.find(s.id); it != correct.end() && it->second) {
      ++tag.kept;
      out.kept.push_back(s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mock experiment

std::vector<DetectorInput> detector_inputs(std::span<const RunRecord> records) {
  std::vector<DetectorInput> out;
  for (const SampleOutcome& o : sample_outcomes(records)) {
    out.push_back({o.sample_id, o.attack, o.triple});
  }
  return out;
}

ExperimentResult run_mock_experiment(const ExperimentConfig& config) {
  if (!(config.known_fraction >= 0.0 && config.known_fraction <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "known_fraction outside [0, 1]");
  }
  ExperimentResult result;
  SyntheticCorpus corpus =
      synthetic_corpus(config.n_samples, derive_seed(config.seed, "corpus"));
  const std::uint64_t known_seed = derive_seed(config.seed, "known");
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    corpus.entries[i].known =
        unit_interval(hash64(corpus.samples[i].id, known_seed)) < config.known_fraction;
  }
  MockKnowledge kb = config.mock;
  kb.entries = std::move(corpus.entries);
  kb.seed = derive_seed(config.seed, "mock");
  const MockVictim victim(std::move(kb));

  BuildOptions build;
  build.concurrency = config.concurrency;
  build.seed = derive_seed(config.seed, "build");
  const BuildResult dataset = build_dataset(corpus.samples, victim, build);
  if (!dataset.failures.empty()) {
    throw Error(Errc::kGenerationFailed,
                "mock dataset build failed for '" + dataset.failures.front().id +
                    "': " + dataset.failures.front().reason);
  }
  for (const AdversarialRecord& r : dataset.records) {
    result.samples.push_back(to_sample(r));
  }
  const FactChecker checker = fact_checker_from(dataset.records);

  RunOptions run;
  run.runs = config.runs;
  run.seed = derive_seed(config.seed, "runs");
  run.concurrency = config.concurrency;
  result.baseline = baseline_filter(result.samples, victim, run);

  std::set<std::string> kept;
  for (const QaSample& s : result.baseline.kept) kept.insert(s.id);
  for (const RunRecord& r : result.baseline.run.records) {
    if (kept.contains(r.sample_id)) result.records.push_back(r);
  }
  for (AttackKind kind : config.attacks) {
    if (kind == AttackKind::kNone) continue;
    AttackRun attack =
        run_attack(kind, result.baseline.kept, result.samples, &checker, victim, run);
    result.records.insert(result.records.end(), attack.records.begin(),
                          attack.records.end());
    result.attacks.push_back(std::move(attack));
  }
  if (result.records.empty()) return result;

  result.report = summarize(result.records);
  if (config.train_detectors) {
    DetectorOptions detector = config.detector;
    detector.seed = derive_seed(config.seed, "detectors");
    const std::vector<DetectorInput> inputs = detector_inputs(result.records);
    result.detectors = train_detectors(inputs, detector);
    for (const DetectorReport& d : result.detectors) {
      DetectorAuc auc{victim.model_name(), d.name, std::nullopt};
      if (d.trained) auc.auc = d.test_roc.auc;
      result.report.detectors.push_back(std::move(auc));
    }
  }
  return result;
}

std::map<std::string, std::string> describe(const ExperimentConfig& config) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::map<std::string, std::string> out;
  out["n_samples"] = std::to_string(config.n_samples);
  out["runs"] = std::to_string(config.runs);
  out["seed"] = std::to_string(config.seed);
  out["known_fraction"] = num(config.known_fraction);
  out["p_alpha"] = num(config.mock.p_follow_wrong_instruction);
  out["p_beta"] = num(config.mock.p_context_override);
  out["p_gamma"] = num(config.mock.p_irrelevant_context);
  std::string attacks;
  for (AttackKind k : config.attacks) {
    if (!attacks.empty()) attacks += ',';
    attacks += to_string(k);
  }
  out["attacks"] = attacks;
  out["train_detectors"] = config.train_detectors ? "true" : "false";
  out["grid_size"] = std::to_string(config.detector.grid.enumerate().size());
  out["folds"] = std::to_string(config.detector.cv.folds);
  return out;
}

void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result,
                      const ExperimentConfig& config) {
  std::filesystem::create_directories(dir);
  write_records(dir / "records.jsonl", result.records);
  write_report_files(dir, result.report);
  for (const DetectorReport& d : result.detectors) {
    if (!d.trained) continue;
    save_model(dir / ("detector_" + d.name + ".json"), d.model);
    std::ofstream roc(dir / ("roc_" + d.name + ".csv"), std::ios::binary);
    if (!roc) throw Error(Errc::kIoError, "cannot write ROC file");
    write_roc_csv(roc, d.test_roc);
  }
  write_manifest(dir, config.seed, describe(config));
}

}  // namespace xmera
