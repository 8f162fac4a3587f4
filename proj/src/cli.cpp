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

#include "xmera/cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "xmera/dataset.hpp"
#include "xmera/detector.hpp"
#include "xmera/harness.hpp"
#include "xmera/proxy.hpp"
#include "xmera/synthetic.hpp"
#include "xmera/victim.hpp"

namespace xmera::cli {
namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

struct Global {
  std::uint64_t seed = 1;
  std::string out = "out";
};

struct VictimOptions {
  std::string victim = "mock";
  std::string endpoint;
  std::string model = "mock";
  std::string api_key_env = "OPENAI_API_KEY";
  int top_k = 10;
  int timeout_ms = 30000;
  int max_retries = 3;
  int concurrency = 1;
  double p_alpha = 0.85;
  double p_beta = 0.46;
  double p_gamma = 0.25;
  double known_fraction = 1.0;
  std::size_t n_samples = 1000;
  std::string adversarial;
  bool skip_invalid = false;
};

struct RunFlags {
  int runs = 10;
  double failure_threshold = 0.05;
  std::string checkpoint;
};

struct DetectorFlags {
  std::string grid = "full";
  int folds = 5;
  int threads = 1;
};

void add_victim_options(CLI::App* cmd, VictimOptions& v) {
  cmd->add_option("--victim", v.victim, "mock or remote")
      ->check(CLI::IsMember({"mock", "remote"}))
      ->capture_default_str();
  cmd->add_option("--endpoint", v.endpoint, "chat-completion base URL (remote)");
  cmd->add_option("--model", v.model, "model name")->capture_default_str();
  cmd->add_option("--api-key-env", v.api_key_env, "environment variable with the API key")
      ->capture_default_str();
  cmd->add_option("--top-k", v.top_k, "top logprobs per position")
      ->check(CLI::Range(1, 10))
      ->capture_default_str();
  cmd->add_option("--timeout-ms", v.timeout_ms, "per-request timeout")
      ->capture_default_str();
  cmd->add_option("--max-retries", v.max_retries, "retries on 429/5xx")
      ->capture_default_str();
  cmd->add_option("--concurrency", v.concurrency, "victim calls in flight")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--p-alpha", v.p_alpha, "mock: alpha susceptibility")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--p-beta", v.p_beta, "mock: false-context susceptibility")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--p-gamma", v.p_gamma, "mock: irrelevant-context susceptibility")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--known-fraction", v.known_fraction, "mock: fraction of known questions")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--n-samples", v.n_samples, "mock: synthetic corpus size")
      ->capture_default_str();
  cmd->add_option("--adversarial", v.adversarial, "adversarial.jsonl input");
  cmd->add_flag("--skip-invalid", v.skip_invalid, "skip invalid input lines");
}

void add_run_options(CLI::App* cmd, RunFlags& r) {
  cmd->add_option("--runs", r.runs, "runs per sample")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--failure-threshold", r.failure_threshold,
                  "maximum tolerated fraction of failed samples")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--checkpoint", r.checkpoint, "JSONL checkpoint for resumable runs");
}

void add_detector_options(CLI::App* cmd, DetectorFlags& d) {
  cmd->add_option("--grid", d.grid, "hyperparameter grid: full or small")
      ->check(CLI::IsMember({"full", "small"}))
      ->capture_default_str();
  cmd->add_option("--folds", d.folds, "cross-validation folds")
      ->check(CLI::Range(2, 100))
      ->capture_default_str();
  cmd->add_option("--threads", d.threads, "grid-search threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

HyperGrid make_grid(const std::string& name) {
  if (name == "small") {
    HyperGrid g;
    g.n_estimators = {50, 100};
    g.max_depth = {std::nullopt, 10};
    g.min_samples_split = {2};
    g.min_samples_leaf = {1};
    g.max_features = {MaxFeatures::kSqrt};
    return g;
  }
  return HyperGrid{};
}

DetectorOptions make_detector_options(const DetectorFlags& d, std::uint64_t seed) {
  DetectorOptions opts;
  opts.grid = make_grid(d.grid);
  opts.cv.folds = d.folds;
  opts.cv.threads = d.threads;
  opts.seed = seed;
  return opts;
}

MockKnowledge mock_params(const VictimOptions& v, std::uint64_t seed) {
  MockKnowledge kb;
  kb.p_follow_wrong_instruction = v.p_alpha;
  kb.p_context_override = v.p_beta;
  kb.p_irrelevant_context = v.p_gamma;
  kb.seed = derive_seed(seed, "mock");
  return kb;
}

void apply_known_fraction(MockKnowledge& kb, double fraction, std::uint64_t seed) {
  const std::uint64_t known_seed = derive_seed(seed, "known");
  for (MockEntry& e : kb.entries) {
    e.known = unit_interval(hash64(e.question, known_seed)) < fraction;
  }
}

std::unique_ptr<Victim> make_remote(const VictimOptions& v) {
  if (v.endpoint.empty()) {
    throw Error(Errc::kInvalidArgument, "--endpoint is required for --victim remote");
  }
  VictimConfig cfg;
  cfg.kind = VictimKind::kRemote;
  cfg.endpoint = v.endpoint;
  cfg.model_name = v.model;
  cfg.api_key_env = v.api_key_env;
  cfg.top_k = v.top_k;
  cfg.timeout = std::chrono::milliseconds(v.timeout_ms);
  cfg.max_retries = v.max_retries;
  cfg.max_concurrency = v.concurrency;
  return make_victim(cfg);
}

// Adversarial records plus the victim that answers them.
struct Workload {
  std::vector<AdversarialRecord> records;
  std::unique_ptr<Victim> victim;
};

Workload load_workload(const VictimOptions& v, std::uint64_t seed) {
  Workload w;
  if (!v.adversarial.empty()) {
    w.records = load_adversarial(v.adversarial, {v.skip_invalid}).records;
  }
  if (v.victim == "remote") {
    if (w.records.empty()) {
      throw Error(Errc::kInvalidArgument, "--adversarial is required for a remote victim");
    }
    w.victim = make_remote(v);
    return w;
  }
  MockKnowledge kb = mock_params(v, seed);
  if (w.records.empty()) {
    SyntheticCorpus corpus = synthetic_corpus(v.n_samples, derive_seed(seed, "corpus"));
    kb.entries = std::move(corpus.entries);
    apply_known_fraction(kb, v.known_fraction, seed);
    auto victim = std::make_unique<MockVictim>(kb, v.model);
    BuildOptions build;
    build.concurrency = v.concurrency;
    build.seed = derive_seed(seed, "build");
    BuildResult built = build_dataset(corpus.samples, *victim, build);
    if (!built.failures.empty()) {
      throw Error(Errc::kGenerationFailed, built.failures.front().reason);
    }
    w.records = std::move(built.records);
    w.victim = std::move(victim);
    return w;
  }
  const MockKnowledge from_records = mock_knowledge_from(w.records);
  kb.entries = from_records.entries;
  apply_known_fraction(kb, v.known_fraction, seed);
  w.victim = std::make_unique<MockVictim>(std::move(kb), v.model);
  return w;
}

RunOptions run_options(const RunFlags& r, const VictimOptions& v, std::uint64_t seed) {
  RunOptions opts;
  opts.runs = r.runs;
  opts.seed = derive_seed(seed, "runs");
  opts.concurrency = v.concurrency;
  opts.failure_threshold = r.failure_threshold;
  if (!r.checkpoint.empty()) opts.checkpoint = r.checkpoint;
  return opts;
}

void write_failures(const fs::path& path, std::span<const SampleFailure> failures) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  for (const SampleFailure& f : failures) {
    out << nlohmann::json{{"sample_id", f.sample_id}, {"reason", f.reason}}.dump()
        << '\n';
  }
}

// Returns false (and reports) when the failure fraction is over threshold.
bool check_failures(const AttackRun& run, double threshold, const fs::path& dir,
                    const std::string& label) {
  if (run.failures.empty()) return true;
  write_failures(dir / ("failures_" + label + ".jsonl"), run.failures);
  std::cerr << label << ": " << run.failures.size() << " of " << run.attempted
            << " samples failed\n";
  return !run.failed(threshold);
}

std::vector<RunRecord> kept_records(const BaselineResult& baseline) {
  std::set<std::string> kept;
  for (const QaSample& s : baseline.kept) kept.insert(s.id);
  std::vector<RunRecord> out;
  for (const RunRecord& r : baseline.run.records) {
    if (kept.contains(r.sample_id)) out.push_back(r);
  }
  return out;
}

std::map<std::string, std::string> flags_of(const CLI::App& cmd) {
  std::map<std::string, std::string> out;
  out["command"] = cmd.get_name();
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
    std::string value;
    for (const std::string& r : opt->results()) {
      if (!value.empty()) value += ',';
      value += r;
    }
    if (value.empty()) value = opt->get_default_str();
    out[opt->get_name()] = value;
  }
  return out;
}

fs::path records_path(const std::string& in) {
  fs::path p(in);
  if (fs::is_directory(p)) p /= "records.jsonl";
  return p;
}

void write_baseline_csv(const fs::path& path, const BaselineResult& baseline) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  out << "dataset,total,kept,accuracy\n";
  for (const auto& [tag, acc] : baseline.per_tag) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", acc.accuracy());
    out << to_string(tag) << ',' << acc.total << ',' << acc.kept << ',' << buf << '\n';
  }
}

void write_cv_csv(const fs::path& path, const GridSearchResult& search) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  out << "grid_index,n_estimators,max_depth,min_samples_split,min_samples_leaf,"
         "max_features,mean_auc\n";
  for (const CvRow& row : search.table) {
    const Hyperparams& hp = row.hyperparams;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", row.mean_auc);
    out << row.grid_index << ',' << hp.n_estimators << ','
        << (hp.max_depth ? std::to_string(*hp.max_depth) : "None") << ','
        << hp.min_samples_split << ',' << hp.min_samples_leaf << ','
        << to_string(hp.max_features) << ',' << buf << '\n';
  }
}

void write_detectors(const fs::path& dir, std::span<const DetectorReport> reports,
                     const std::string& model) {
  fs::create_directories(dir);
  ExperimentReport table;
  for (const DetectorReport& d : reports) {
    DetectorAuc row{model, d.name, std::nullopt};
    if (d.trained) {
      row.auc = d.test_roc.auc;
      save_model(dir / ("detector_" + d.name + ".json"), d.model);
      std::ofstream roc(dir / ("roc_" + d.name + ".csv"), std::ios::binary);
      write_roc_csv(roc, d.test_roc);
      write_cv_csv(dir / ("cv_" + d.name + ".csv"), d.search);
      std::cout << d.name << ": test AUC " << d.test_roc.auc << " (best "
                << to_string(d.search.best) << ")\n";
    } else {
      std::cout << d.name << ": skipped (" << d.skip_reason << ")\n";
    }
    table.detectors.push_back(std::move(row));
  }
  std::ofstream out(dir / "detectors.csv", std::ios::binary | std::ios::trunc);
  write_detectors_csv(out, table);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_build_dataset(const Global& g, const VictimOptions& v, const std::string& qa,
                      int retries, const CLI::App& cmd) {
  const std::vector<QaSample> samples = load_qa(qa, {v.skip_invalid}).records;
  std::unique_ptr<Victim> generator;
  if (v.victim == "remote") {
    generator = make_remote(v);
  } else {
    MockKnowledge kb = mock_params(v, g.seed);
    kb.entries = mock_knowledge_from(samples, derive_seed(g.seed, "wrong")).entries;
    generator = std::make_unique<MockVictim>(std::move(kb), v.model);
  }
  BuildOptions build;
  build.retries = retries;
  build.concurrency = v.concurrency;
  build.seed = derive_seed(g.seed, "build");
  const BuildResult result = build_dataset(samples, *generator, build);
  fs::create_directories(g.out);
  write_adversarial(fs::path(g.out) / "adversarial.jsonl", result.records);
  std::vector<SampleFailure> failures;
  for (const BuildFailure& f : result.failures) failures.push_back({f.id, f.reason});
  if (!failures.empty()) write_failures(fs::path(g.out) / "build_failures.jsonl", failures);
  write_manifest(g.out, g.seed, flags_of(cmd));
  std::cout << "built " << result.records.size() << " records, "
            << result.failures.size() << " failures\n";
  return 0;
}

int cmd_baseline(const Global& g, const VictimOptions& v, const RunFlags& r,
                 const CLI::App& cmd) {
  Workload w = load_workload(v, g.seed);
  std::vector<QaSample> samples;
  for (const AdversarialRecord& rec : w.records) samples.push_back(to_sample(rec));
  const BaselineResult baseline = baseline_filter(samples, *w.victim, run_options(r, v, g.seed));
  const fs::path dir(g.out);
  fs::create_directories(dir);
  write_records(dir / "baseline_records.jsonl", baseline.run.records);
  std::set<std::string> kept;
  for (const QaSample& s : baseline.kept) kept.insert(s.id);
  std::vector<AdversarialRecord> kept_records_out;
  for (const AdversarialRecord& rec : w.records) {
    if (kept.contains(rec.id)) kept_records_out.push_back(rec);
  }
  write_adversarial(dir / "kept.jsonl", kept_records_out);
  write_baseline_csv(dir / "baseline.csv", baseline);
  write_manifest(dir, g.seed, flags_of(cmd));
  std::cout << "kept " << baseline.kept.size() << " of " << samples.size() << " samples\n";
  return check_failures(baseline.run, r.failure_threshold, dir, "baseline") ? 0 : 1;
}

int cmd_attack(const Global& g, const VictimOptions& v, const RunFlags& r,
               const std::string& kind_text, const CLI::App& cmd) {
  const AttackKind kind = parse_attack_kind(kind_text);
  Workload w = load_workload(v, g.seed);
  std::vector<QaSample> samples;
  for (const AdversarialRecord& rec : w.records) samples.push_back(to_sample(rec));
  const FactChecker checker = fact_checker_from(w.records);
  const RunOptions opts = run_options(r, v, g.seed);
  const fs::path dir(g.out);
  fs::create_directories(dir);

  const BaselineResult baseline = baseline_filter(samples, *w.victim, opts);
  bool ok = check_failures(baseline.run, r.failure_threshold, dir, "baseline");
  std::vector<RunRecord> records = kept_records(baseline);
  if (kind != AttackKind::kNone) {
    const AttackRun run = run_attack(kind, baseline.kept, samples, &checker, *w.victim, opts);
    ok = check_failures(run, r.failure_threshold, dir, std::string(to_string(kind))) && ok;
    records.insert(records.end(), run.records.begin(), run.records.end());
  }
  write_records(dir / "records.jsonl", records);
  write_baseline_csv(dir / "baseline.csv", baseline);
  if (!records.empty()) {
    const ExperimentReport report = summarize(records);
    write_report_files(dir, report);
    for (const ReportCell& c : report.cells) {
      if (c.attack != kind) continue;
      std::cout << to_string(c.dataset_tag) << ' ' << to_string(c.attack)
                << ": accuracy " << c.accuracy << ", ASR " << c.asr << '\n';
    }
  }
  write_manifest(dir, g.seed, flags_of(cmd));
  return ok ? 0 : 1;
}

int cmd_summarize(const Global& g, const std::string& in, const CLI::App& cmd) {
  const std::vector<RunRecord> records = load_records(records_path(in));
  const ExperimentReport report = summarize(records);
  write_report_files(g.out, report);
  write_manifest(g.out, g.seed, flags_of(cmd));
  std::cout << "summarized " << records.size() << " records into " << report.cells.size()
            << " cells\n";
  return 0;
}

int cmd_train(const Global& g, const std::string& in, const DetectorFlags& d,
              const CLI::App& cmd) {
  const std::vector<RunRecord> records = load_records(records_path(in));
  const std::vector<DetectorInput> inputs = detector_inputs(records);
  const auto reports =
      train_detectors(inputs, make_detector_options(d, derive_seed(g.seed, "detectors")));
  const std::string model = records.empty() ? "" : records.front().model;
  write_detectors(g.out, reports, model);
  write_manifest(g.out, g.seed, flags_of(cmd));
  return 0;
}

int cmd_evaluate(const Global& g, const std::string& model_path, const std::string& in,
                 const std::string& detector, const CLI::App& cmd) {
  const ForestModel model = load_model(model_path);
  const std::vector<RunRecord> records = load_records(records_path(in));
  const std::vector<DetectorInput> inputs = detector_inputs(records);
  const std::vector<LabeledPoint> points = detector_points(inputs, detector);
  std::vector<ScoredLabel> scores;
  for (const LabeledPoint& p : points) {
    scores.push_back({predict_proba(model, p.features), p.label});
  }
  const RocCurve roc = roc_auc(scores);
  fs::create_directories(g.out);
  std::ofstream out(fs::path(g.out) / ("eval_" + detector + ".csv"), std::ios::binary);
  write_roc_csv(out, roc);
  write_manifest(g.out, g.seed, flags_of(cmd));
  std::cout << detector << ": AUC " << roc.auc << " over " << points.size() << " points\n";
  return 0;
}

int cmd_proxy(const Global& g, const std::string& listen, const std::string& upstream,
              const std::string& attack, const std::string& adversarial,
              const std::string& log) {
  ProxyConfig cfg;
  std::tie(cfg.listen_host, cfg.listen_port) = parse_listen_address(listen);
  cfg.upstream_base_url = upstream;
  cfg.attack = parse_attack_kind(attack);
  if (!adversarial.empty()) cfg.adversarial_source = adversarial;
  if (!log.empty()) cfg.log_path = log;
  cfg.seed = g.seed;
  ProxyServer server(cfg);
  const int port = server.start();
  std::cout << "proxy listening on " << cfg.listen_host << ':' << port << ", attack "
            << to_string(cfg.attack) << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  std::cout << "proxy stopped after " << server.requests_seen() << " requests, "
            << server.interceptor().audit_count() << " rewritten" << std::endl;
  return 0;
}

int cmd_experiment(const Global& g, const VictimOptions& v, const RunFlags& r,
                   const DetectorFlags& d, bool no_detectors) {
  ExperimentConfig cfg;
  cfg.n_samples = v.n_samples;
  cfg.runs = r.runs;
  cfg.seed = g.seed;
  cfg.known_fraction = v.known_fraction;
  cfg.mock = mock_params(v, g.seed);
  cfg.train_detectors = !no_detectors;
  cfg.detector = make_detector_options(d, 0);
  cfg.concurrency = v.concurrency;
  const ExperimentResult result = run_mock_experiment(cfg);
  write_experiment(g.out, result, cfg);
  for (const ReportCell& c : result.report.cells) {
    std::cout << to_string(c.dataset_tag) << ' ' << to_string(c.attack) << ": ASR "
              << c.asr << ", H " << c.entropy.mean << '\n';
  }
  for (const DetectorAuc& a : result.report.detectors) {
    std::cout << "detector " << a.detector << ": "
              << (a.auc ? std::to_string(*a.auc) : std::string("skipped")) << '\n';
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Query-perturbation attacks on QA models and uncertainty-based detection",
               "xmera"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file");

  Global g;
  app.add_option("--seed", g.seed, "base seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();

  VictimOptions v;
  RunFlags r;
  DetectorFlags d;

  auto* build = app.add_subcommand("build-dataset", "build adversarial contexts for QA items");
  std::string qa;
  int retries = 5;
  build->add_option("--qa", qa, "qa.jsonl input")->required();
  build->add_option("--retries", retries, "generation attempts per item")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_victim_options(build, v);

  auto* baseline = app.add_subcommand("baseline", "keep samples the victim answers correctly");
  add_victim_options(baseline, v);
  add_run_options(baseline, r);

  auto* attack = app.add_subcommand("attack", "run one attack over the kept samples");
  std::string kind = "alpha";
  attack->add_option("--kind", kind, "none, alpha, beta or gamma")
      ->check(CLI::IsMember({"none", "alpha", "beta", "gamma"}))
      ->capture_default_str();
  add_victim_options(attack, v);
  add_run_options(attack, r);

  auto* summarize_cmd = app.add_subcommand("summarize", "tables from run records");
  std::string in;
  summarize_cmd->add_option("--in", in, "records.jsonl or a directory holding it")
      ->required();

  auto* train = app.add_subcommand("train-detector", "train the four attack detectors");
  train->add_option("--in", in, "records.jsonl or a directory holding it")->required();
  add_detector_options(train, d);

  auto* evaluate = app.add_subcommand("evaluate-detector", "score a saved detector");
  std::string model_path, detector = "any";
  evaluate->add_option("--model", model_path, "detector model JSON")->required();
  evaluate->add_option("--in", in, "records.jsonl or a directory holding it")->required();
  evaluate->add_option("--detector", detector, "any, alpha, beta or gamma")
      ->check(CLI::IsMember({"any", "alpha", "beta", "gamma"}))
      ->capture_default_str();

  auto* proxy = app.add_subcommand("proxy", "intercepting chat-completion proxy");
  std::string listen = "127.0.0.1:8080", upstream, proxy_attack = "alpha", adversarial,
              log;
  proxy->add_option("--listen", listen, "host:port")->capture_default_str();
  proxy->add_option("--upstream", upstream, "upstream base URL")->required();
  proxy->add_option("--attack", proxy_attack, "alpha, beta, gamma or none")
      ->check(CLI::IsMember({"none", "alpha", "beta", "gamma"}))
      ->capture_default_str();
  proxy->add_option("--adversarial", adversarial, "adversarial.jsonl for beta and gamma");
  proxy->add_option("--log", log, "audit log (JSON lines)");

  auto* experiment =
      app.add_subcommand("experiment", "full mock pipeline: dataset, attacks, report, detectors");
  bool no_detectors = false;
  add_victim_options(experiment, v);
  add_run_options(experiment, r);
  add_detector_options(experiment, d);
  experiment->add_flag("--no-detectors", no_detectors, "skip detector training");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*build) return cmd_build_dataset(g, v, qa, retries, *build);
    if (*baseline) return cmd_baseline(g, v, r, *baseline);
    if (*attack) return cmd_attack(g, v, r, kind, *attack);
    if (*summarize_cmd) return cmd_summarize(g, in, *summarize_cmd);
    if (*train) return cmd_train(g, in, d, *train);
    if (*evaluate) return cmd_evaluate(g, model_path, in, detector, *evaluate);
    if (*proxy) return cmd_proxy(g, listen, upstream, proxy_attack, adversarial, log);
    if (*experiment) return cmd_experiment(g, v, r, d, no_detectors);
  } catch (const std::exception& e) {
    std::cerr << "xmera: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace xmera::cli
