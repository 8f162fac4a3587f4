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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <unordered_set>

#include "xmera/detector.hpp"

namespace xmera {
namespace {

std::vector<LabeledPoint> canonical(std::span<const LabeledPoint> points) {
  std::vector<LabeledPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledPoint& a, const LabeledPoint& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].id == sorted[i - 1].id) {
      throw Error(Errc::kInvalidArgument, "duplicate point id '" + sorted[i].id + "'");
    }
  }
  return sorted;
}

// Per class, point indices ordered by a seeded hash of their id.
std::array<std::vector<std::size_t>, 2> hashed_order(
    std::span<const LabeledPoint> points, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < points.size(); ++i) {
    by_class[static_cast<std::size_t>(points[i].label != 0)].push_back(i);
  }
  for (auto& indices : by_class) {
    std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
      const std::uint64_t ha = hash64(points[a].id, seed);
      const std::uint64_t hb = hash64(points[b].id, seed);
      return ha < hb || (ha == hb && points[a].id < points[b].id);
    });
  }
  return by_class;
}

std::vector<ScoredLabel> score(const ForestModel& model,
                               std::span<const LabeledPoint> points) {
  std::vector<ScoredLabel> out;
  out.reserve(points.size());
  for (const LabeledPoint& p : points) {
    out.push_back({predict_proba(model, p.features), p.label});
  }
  return out;
}

}  // namespace

std::vector<Hyperparams> HyperGrid::enumerate() const {
  std::vector<Hyperparams> out;
  for (int n : n_estimators)
    for (const auto& depth : max_depth)
      for (int split : min_samples_split)
        for (int leaf : min_samples_leaf)
          for (MaxFeatures mf : max_features)
            out.push_back(Hyperparams{n, depth, split, leaf, mf});
  return out;
}

HyperGrid HyperGrid::single(const Hyperparams& hp) {
  return HyperGrid{{hp.n_estimators},
                   {hp.max_depth},
                   {hp.min_samples_split},
                   {hp.min_samples_leaf},
                   {hp.max_features}};
}

std::vector<int> stratified_folds(std::span<const LabeledPoint> points, int folds,
                                  std::uint64_t seed) {
  if (folds < 2) throw Error(Errc::kInvalidArgument, "need at least two folds");
  std::vector<int> assignment(points.size(), 0);
  for (const auto& indices : hashed_order(points, seed)) {
    for (std::size_t r = 0; r < indices.size(); ++r) {
      assignment[indices[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));
    }
  }
  return assignment;
}

std::vector<FoldPlan> plan_folds(std::span<const LabeledPoint> points,
                                 std::uint64_t seed, const CvOptions& options) {
  const std::vector<LabeledPoint> rows = canonical(points);
  std::array<std::size_t, 2> counts{0, 0};
  for (const LabeledPoint& p : rows) ++counts[static_cast<std::size_t>(p.label != 0)];
  const auto folds = static_cast<std::size_t>(std::max(options.folds, 0));
  if (counts[0] < folds || counts[1] < folds) {
    throw Error(Errc::kTooFewPerClass,
                "each class needs at least " + std::to_string(folds) +
                    " points, got " + std::to_string(counts[0]) + " and " +
                    std::to_string(counts[1]));
  }
  const std::vector<int> assignment = stratified_folds(rows, options.folds, seed);

  std::vector<FoldPlan> plans(folds);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t f = 0; f < folds; ++f) {
      if (static_cast<std::size_t>(assignment[i]) == f) {
        plans[f].validation.push_back(rows[i]);
      } else {
        plans[f].train.push_back(rows[i]);
      }
    }
  }
  if (options.oversample) {
    for (std::size_t f = 0; f < folds; ++f) {
      plans[f].train =
          adasyn(plans[f].train, options.k_neighbors, options.target_ratio,
                 derive_seed(seed, "adasyn-fold-" + std::to_string(f)));
    }
  }
  return plans;
}

GridSearchResult grid_search_cv(std::span<const LabeledPoint> points,
                                const HyperGrid& grid, std::uint64_t seed,
                                const CvOptions& options) {
  const std::vector<Hyperparams> candidates = grid.enumerate();
  if (candidates.empty()) throw Error(Errc::kInvalidArgument, "empty grid");
  const std::vector<FoldPlan> plans = plan_folds(points, seed, options);

  GridSearchResult result;
  result.table.resize(candidates.size());
  auto evaluate = [&](std::size_t g) {
    CvRow& row = result.table[g];
    row.grid_index = g;
    row.hyperparams = candidates[g];
    const std::uint64_t grid_seed = derive_seed(seed, static_cast<std::uint64_t>(g));
    double sum = 0.0;
    for (const FoldPlan& plan : plans) {
      const ForestModel model = fit_forest(plan.train, candidates[g], grid_seed);
      const double auc = roc_auc(score(model, plan.validation)).auc;
      row.fold_aucs.push_back(auc);
      sum += auc;
    }
    row.mean_auc = sum / static_cast<double>(plans.size());
  };

  const auto threads = static_cast<std::size_t>(std::max(options.threads, 1));
  if (threads == 1) {
    for (std::size_t g = 0; g < candidates.size(); ++g) evaluate(g);
  } else {
    // Grid points are independent; results land in fixed slots so the outcome
    // equals the sequential order.
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(candidates.size());
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < std::min(threads, candidates.size()); ++t) {
      workers.emplace_back([&] {
        for (std::size_t g = next++; g < candidates.size(); g = next++) {
          try {
            evaluate(g);
          } catch (...) {
            errors[g] = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (std::size_t g = 0; g < result.table.size(); ++g) {
    if (g == 0 || result.table[g].mean_auc > result.table[result.best_index].mean_auc) {
      result.best_index = g;
    }
  }
  result.best = candidates[result.best_index];
  return result;
}

std::pair<std::vector<LabeledPoint>, std::vector<LabeledPoint>> stratified_split(
    std::span<const LabeledPoint> points, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::kInvalidArgument, "test_fraction must be in (0, 1)");
  }
  const std::vector<LabeledPoint> rows = canonical(points);
  std::vector<char> in_test(rows.size(), 0);
  for (const auto& indices :
       hashed_order(rows, derive_seed(seed, "train-test-split"))) {
    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(indices.size())));
    if (indices.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, indices.size() - 1);
    for (std::size_t r = 0; r < n_test; ++r) in_test[indices[r]] = 1;
  }
  std::pair<std::vector<LabeledPoint>, std::vector<LabeledPoint>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    (in_test[i] ? out.second : out.first).push_back(rows[i]);
  }
  return out;
}

std::vector<LabeledPoint> detector_points(std::span<const DetectorInput> inputs,
                                          std::string_view name) {
  const bool any = name == "any";
  const AttackKind wanted = any ? AttackKind::kNone : parse_attack_kind(name);
  std::vector<LabeledPoint> out;
  for (const DetectorInput& in : inputs) {
    const bool baseline = in.kind == AttackKind::kNone;
    if (!baseline && !any && in.kind != wanted) continue;
    LabeledPoint p;
    p.id = std::string(to_string(in.kind)) + ":" + in.sample_id;
    p.features = features_of(in.triple);
    p.label = baseline ? 0 : 1;
    p.attack_kind = in.kind;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<DetectorReport> train_detectors(std::span<const DetectorInput> inputs,
                                            const DetectorOptions& options) {
  std::vector<DetectorReport> reports;
  for (std::string_view name : {"any", "alpha", "beta", "gamma"}) {
    DetectorReport report;
    report.name = std::string(name);
    const std::vector<LabeledPoint> points = detector_points(inputs, name);
    const auto attacked = static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(),
                      [](const LabeledPoint& p) { return p.label == 1; }));
    if (attacked == points.size()) {
      report.skip_reason = "no unattacked samples";
    } else if (attacked == 0) {
      report.skip_reason = "no " + report.name + " samples";
    }
    if (!report.skip_reason.empty()) {
      reports.push_back(std::move(report));
      continue;
    }

    auto [train, test] = stratified_split(points, options.test_fraction, options.seed);
    report.n_train = train.size();
    report.n_test = test.size();
    report.search = grid_search_cv(train, options.grid, options.seed, options.cv);

    const std::vector<LabeledPoint> final_train =
        options.cv.oversample
            ? adasyn(train, options.cv.k_neighbors, options.cv.target_ratio,
                     derive_seed(options.seed, "adasyn-final"))
            : train;
    const std::size_t best = report.search.best_index;
    report.model = fit_forest(final_train, report.search.best,
                              derive_seed(options.seed, static_cast<std::uint64_t>(best)));
    report.model.metadata.grid_index = best;
    report.model.metadata.cv_auc = report.search.table[best].mean_auc;
    report.model.metadata.fold_aucs = report.search.table[best].fold_aucs;
    report.test_roc = roc_auc(score(report.model, test));
    report.trained = true;
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace xmera
