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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xmera/attacks.hpp"
#include "xmera/uncertainty.hpp"

namespace xmera {

inline constexpr std::size_t kFeatureCount = 3;
/// (entropy, perplexity, token probability)
using FeatureVector = std::array<double, kFeatureCount>;

FeatureVector features_of(const UncertaintyTriple& triple);

struct LabeledPoint {
  std::string id;  // stable and unique within a training set
  FeatureVector features{};
  int label = 0;  // 1 = attacked
  AttackKind attack_kind = AttackKind::kNone;
  bool synthetic = false;
  std::vector<std::string> parents;  // ids of the originals a synthetic came from

  bool operator==(const LabeledPoint&) const = default;
};

// ---------------------------------------------------------------------------
// Oversampling

/// Adaptive synthetic oversampling of the minority class.
///
/// Generates round(n_majority * target_ratio) - n_minority points. Each
/// minority point receives a share proportional to the fraction of majority
/// points among its k nearest neighbours (largest-remainder rounding so the
/// total is exact); each synthetic point lies on the segment from its parent
/// to one of the parent's k nearest minority neighbours. Originals come first
/// and are unchanged. When the minority class has a single distinct location,
/// synthetics are copies of it.
std::vector<LabeledPoint> adasyn(std::span<const LabeledPoint> points,
                                 int k_neighbors, double target_ratio,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Forest

enum class MaxFeatures { kSqrt, kLog2 };

std::string_view to_string(MaxFeatures mf);
MaxFeatures parse_max_features(std::string_view text);

struct Hyperparams {
  int n_estimators = 100;
  std::optional<int> max_depth;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  MaxFeatures max_features = MaxFeatures::kSqrt;

  bool operator==(const Hyperparams&) const = default;
};

std::string to_string(const Hyperparams& hp);
/// Number of candidate features per node: ceil(sqrt(d)) or ceil(log2(d)).
std::size_t candidate_feature_count(MaxFeatures mf, std::size_t n_features);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // fraction of class 1 among the node's samples

  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> features) const;
  int depth() const;

  bool operator==(const DecisionTree&) const = default;
};

struct TrainingMetadata {
  std::optional<std::size_t> grid_index;
  std::optional<double> cv_auc;
  std::vector<double> fold_aucs;
  std::size_t n_train = 0;
  std::size_t n_synthetic = 0;

  bool operator==(const TrainingMetadata&) const = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  Hyperparams hyperparams;
  std::uint64_t seed = 0;
  std::size_t n_features = kFeatureCount;
  TrainingMetadata metadata;

  bool operator==(const ForestModel&) const = default;
};

/// Bagged CART trees with Gini splits. Tree i bootstraps with seed ^ i.
/// Thresholds sit at midpoints of adjacent distinct values; equal impurity
/// prefers the lower feature index, then the lower threshold. Requires at
/// least two points per class (kInsufficientData).
ForestModel fit_forest(std::span<const LabeledPoint> points,
                       const Hyperparams& hyperparams, std::uint64_t seed);

/// Mean over trees of the leaf class-1 fraction.
double predict_proba(const ForestModel& model, std::span<const double> features);

// ---------------------------------------------------------------------------
// ROC

struct ScoredLabel {
  double score = 0.0;
  int label = 0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the origin

  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // fpr non-decreasing, from (0,0) to (1,1)
  double auc = 0.0;

  bool operator==(const RocCurve&) const = default;
};

/// AUC by the Mann-Whitney rank statistic (ties count one half) plus the
/// threshold-sweep curve. Throws kSingleClass unless both labels occur.
RocCurve roc_auc(std::span<const ScoredLabel> scores);

/// Trapezoidal area under the curve points.
double trapezoid_area(std::span<const RocPoint> points);

void write_roc_csv(std::ostream& out, const RocCurve& curve);

// ---------------------------------------------------------------------------
// Model selection

struct HyperGrid {
  std::vector<int> n_estimators{50, 100, 200};
  std::vector<std::optional<int>> max_depth{std::nullopt, 10, 20};
  std::vector<int> min_samples_split{2, 5, 10};
  std::vector<int> min_samples_leaf{1, 2, 4};
  std::vector<MaxFeatures> max_features{MaxFeatures::kSqrt, MaxFeatures::kLog2};

  /// Row-major enumeration in the listed value order, n_estimators outermost.
  std::vector<Hyperparams> enumerate() const;
  static HyperGrid single(const Hyperparams& hp);
};

struct CvOptions {
  int folds = 5;
  int k_neighbors = 5;
  double target_ratio = 1.0;
  bool oversample = true;
  int threads = 1;
};

/// Fold index per point. Assignment is stratified by label and keyed by a
/// seeded hash of the point id, so it does not depend on input order.
std::vector<int> stratified_folds(std::span<const LabeledPoint> points, int folds,
                                  std::uint64_t seed);

struct FoldPlan {
  std::vector<LabeledPoint> train;  // oversampled when enabled
  std::vector<LabeledPoint> validation;
};

/// The exact training and validation sets grid_search_cv evaluates on.
/// Oversampling sees training rows only.
std::vector<FoldPlan> plan_folds(std::span<const LabeledPoint> points,
                                 std::uint64_t seed, const CvOptions& options);

struct CvRow {
  std::size_t grid_index = 0;
  Hyperparams hyperparams;
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
};

struct GridSearchResult {
  Hyperparams best;
  std::size_t best_index = 0;
  std::vector<CvRow> table;
};

/// Scores every grid point by mean validation-fold AUC. Grid point i trains
/// with seed derive_seed(seed, i). Ties keep the earliest grid point.
/// Throws kTooFewPerClass when a class has fewer points than folds.
GridSearchResult grid_search_cv(std::span<const LabeledPoint> points,
                                const HyperGrid& grid, std::uint64_t seed,
                                const CvOptions& options = {});

/// Stratified split into (train, test), keyed by id like stratified_folds.
std::pair<std::vector<LabeledPoint>, std::vector<LabeledPoint>> stratified_split(
    std::span<const LabeledPoint> points, double test_fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Detectors

/// Sample-level uncertainty of one answered query.
struct DetectorInput {
  std::string sample_id;
  AttackKind kind = AttackKind::kNone;
  UncertaintyTriple triple;
};

struct DetectorOptions {
  HyperGrid grid;
  CvOptions cv;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct DetectorReport {
  std::string name;  // "any", "alpha", "beta", "gamma"
  bool trained = false;
  std::string skip_reason;
  GridSearchResult search;
  ForestModel model;
  RocCurve test_roc;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// Labeled points (unattacked = 0) for one detector. `name` is "any" or an
/// attack kind.
std::vector<LabeledPoint> detector_points(std::span<const DetectorInput> inputs,
                                          std::string_view name);

/// Trains the any-attack detector and one detector per attack kind, in that
/// order. A detector whose attacked or unattacked data is missing is
/// reported as skipped.
std::vector<DetectorReport> train_detectors(std::span<const DetectorInput> inputs,
                                            const DetectorOptions& options);

// ---------------------------------------------------------------------------
// Persistence

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const ForestModel& model);
/// Throws kUnsupportedFormat on a newer format_version and kSchemaError on
/// structural problems.
ForestModel model_from_json(std::string_view text);

void save_model(const std::filesystem::path& path, const ForestModel& model);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace xmera
