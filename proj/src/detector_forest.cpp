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
#include <cmath>
#include <numeric>
#include <random>

#include "xmera/detector.hpp"

namespace xmera {
namespace {

// Grows one tree over a bootstrap sample. Each feature keeps its own ordering
// of the sample slots; a node owns the same contiguous range in all three
// orderings, and splitting stably partitions that range, so no node re-sorts.
class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureVector> x, std::span<const int> y,
              std::vector<int> rows, const Hyperparams& hp, std::mt19937_64& rng)
      : x_(x), y_(y), rows_(std::move(rows)), hp_(hp), rng_(rng) {
    const std::size_t m = rows_.size();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      order_[f].resize(m);
      std::iota(order_[f].begin(), order_[f].end(), 0);
      std::sort(order_[f].begin(), order_[f].end(), [&](int a, int b) {
        const double va = value(a, f);
        const double vb = value(b, f);
        return va < vb || (va == vb && a < b);
      });
    }
    goes_left_.assign(m, 0);
    scratch_.resize(m);
    n_candidates_ = candidate_feature_count(hp.max_features, kFeatureCount);
  }

  DecisionTree build() {
    grow(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  double value(int slot, std::size_t f) const { return x_[rows_[slot]][f]; }
  int label(int slot) const { return y_[rows_[slot]]; }

  int grow(std::size_t begin, std::size_t end, int depth) {
    const std::size_t m = end - begin;
    std::size_t positives = 0;
    for (std::size_t i = begin; i < end; ++i) positives += label(order_[0][i]);

    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes[index].value =
        static_cast<double>(positives) / static_cast<double>(m);

    const auto min_leaf = static_cast<std::size_t>(hp_.min_samples_leaf);
    const bool stop = positives == 0 || positives == m ||
                      m < static_cast<std::size_t>(hp_.min_samples_split) ||
                      m < 2 * min_leaf ||
                      (hp_.max_depth && depth >= *hp_.max_depth);
    if (stop) return index;

    const std::optional<Split> split = find_split(begin, end, positives);
    if (!split) return index;

    for (std::size_t i = begin; i < end; ++i) {
      const int slot = order_[0][i];
      goes_left_[slot] = value(slot, split->feature) <= split->threshold ? 1 : 0;
    }
    std::size_t n_left = 0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      n_left = stable_partition(order_[f], begin, end);
    }

    const int left = grow(begin, begin + n_left, depth + 1);
    const int right = grow(begin + n_left, end, depth + 1);
    TreeNode& node = tree_.nodes[index];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  std::size_t stable_partition(std::vector<int>& order, std::size_t begin,
                               std::size_t end) {
    std::size_t write = begin;
    std::size_t spill = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const int slot = order[i];
      if (goes_left_[slot]) {
        order[write++] = slot;
      } else {
        scratch_[spill++] = slot;
      }
    }
    std::copy(scratch_.begin(), scratch_.begin() + spill, order.begin() + write);
    return write - begin;
  }

  std::optional<Split> find_split(std::size_t begin, std::size_t end,
                                  std::size_t positives) {
    std::array<int, kFeatureCount> features{};
    std::iota(features.begin(), features.end(), 0);
    std::shuffle(features.begin(), features.end(), rng_);

    std::optional<Split> best;
    std::size_t examined = 0;
    for (int f : features) {
      if (examined >= n_candidates_ && best) break;
      const std::vector<int>& order = order_[f];
      // Constant features do not count toward the candidate budget.
      if (value(order[begin], f) == value(order[end - 1], f)) continue;
      ++examined;
      scan_feature(f, begin, end, positives, best);
    }
    return best;
  }

  void scan_feature(int f, std::size_t begin, std::size_t end,
                    std::size_t positives, std::optional<Split>& best) const {
    const std::vector<int>& order = order_[f];
    const double m = static_cast<double>(end - begin);
    const std::size_t min_leaf = static_cast<std::size_t>(hp_.min_samples_leaf);
    std::size_t left_pos = 0;
    for (std::size_t i = begin + 1; i < end; ++i) {
      left_pos += label(order[i - 1]);
      const std::size_t n_left = i - begin;
      const std::size_t n_right = (end - begin) - n_left;
      if (n_left < min_leaf || n_right < min_leaf) continue;
      const double lo = value(order[i - 1], f);
      const double hi = value(order[i], f);
      if (!(lo < hi)) continue;

      const double nl = static_cast<double>(n_left);
      const double nr = static_cast<double>(n_right);
      const double pl = static_cast<double>(left_pos);
      const double pr = static_cast<double>(positives - left_pos);
      // Weighted Gini: sum over children of n * (1 - p1^2 - p0^2), over m.
      const double impurity = (nl - (pl * pl + (nl - pl) * (nl - pl)) / nl +
                               nr - (pr * pr + (nr - pr) * (nr - pr)) / nr) /
                              m;
      double threshold = lo + (hi - lo) / 2.0;
      if (threshold >= hi) threshold = lo;

      if (!best || impurity < best->impurity ||
          (impurity == best->impurity &&
           (f < best->feature ||
            (f == best->feature && threshold < best->threshold)))) {
        best = Split{f, threshold, impurity};
      }
    }
  }

  std::span<const FeatureVector> x_;
  std::span<const int> y_;
  std::vector<int> rows_;  // slot -> training row
  const Hyperparams& hp_;
  std::mt19937_64& rng_;
  std::array<std::vector<int>, kFeatureCount> order_;
  std::vector<char> goes_left_;
  std::vector<int> scratch_;
  std::size_t n_candidates_ = 1;
  DecisionTree tree_;
};

void check_hyperparams(const Hyperparams& hp) {
  if (hp.n_estimators < 1 || hp.min_samples_split < 2 || hp.min_samples_leaf < 1 ||
      (hp.max_depth && *hp.max_depth < 1)) {
    throw Error(Errc::kInvalidArgument, "invalid hyperparameters " + to_string(hp));
  }
}

}  // namespace

FeatureVector features_of(const UncertaintyTriple& triple) {
  return {triple.entropy, triple.perplexity, triple.token_prob};
}

std::string_view to_string(MaxFeatures mf) {
  return mf == MaxFeatures::kSqrt ? "sqrt" : "log2";
}

MaxFeatures parse_max_features(std::string_view text) {
  if (text == "sqrt") return MaxFeatures::kSqrt;
  if (text == "log2") return MaxFeatures::kLog2;
  throw Error(Errc::kInvalidArgument,
              "max_features must be sqrt or log2, got '" + std::string(text) + "'");
}

std::string to_string(const Hyperparams& hp) {
  return "{n_estimators=" + std::to_string(hp.n_estimators) + ", max_depth=" +
         (hp.max_depth ? std::to_string(*hp.max_depth) : std::string("None")) +
         ", min_samples_split=" + std::to_string(hp.min_samples_split) +
         ", min_samples_leaf=" + std::to_string(hp.min_samples_leaf) +
         ", max_features=" + std::string(to_string(hp.max_features)) + "}";
}

std::size_t candidate_feature_count(MaxFeatures mf, std::size_t n_features) {
  const double d = static_cast<double>(n_features);
  const double k = mf == MaxFeatures::kSqrt ? std::ceil(std::sqrt(d))
                                            : std::ceil(std::log2(d));
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n_features);
}

double DecisionTree::predict(std::span<const double> features) const {
  int i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& node = nodes[i];
    i = features[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[i].value;
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) {
      level[nodes[i].left] = level[i] + 1;
      level[nodes[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

ForestModel fit_forest(std::span<const LabeledPoint> points,
                       const Hyperparams& hyperparams, std::uint64_t seed) {
  check_hyperparams(hyperparams);
  std::size_t positives = 0;
  std::vector<FeatureVector> x;
  std::vector<int> y;
  x.reserve(points.size());
  y.reserve(points.size());
  for (const LabeledPoint& p : points) {
    for (double v : p.features) {
      if (!std::isfinite(v)) {
        throw Error(Errc::kInvalidArgument, "non-finite feature in '" + p.id + "'");
      }
    }
    if (p.label != 0 && p.label != 1) {
      throw Error(Errc::kInvalidArgument, "label must be 0 or 1");
    }
    positives += static_cast<std::size_t>(p.label);
    x.push_back(p.features);
    y.push_back(p.label);
  }
  if (positives < 2 || points.size() - positives < 2) {
    throw Error(Errc::kInsufficientData,
                "need at least two points per class, got " +
                    std::to_string(points.size() - positives) + " and " +
                    std::to_string(positives));
  }

  ForestModel model;
  model.hyperparams = hyperparams;
  model.seed = seed;
  model.metadata.n_train = points.size();
  for (const LabeledPoint& p : points) model.metadata.n_synthetic += p.synthetic;
  model.trees.reserve(static_cast<std::size_t>(hyperparams.n_estimators));

  const std::size_t n = points.size();
  for (int t = 0; t < hyperparams.n_estimators; ++t) {
    std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(t));
    std::uniform_int_distribution<int> draw(0, static_cast<int>(n) - 1);
    std::vector<int> rows(n);
    for (int& r : rows) r = draw(rng);
    TreeBuilder builder(x, y, std::move(rows), hyperparams, rng);
    model.trees.push_back(builder.build());
  }
  return model;
}

double predict_proba(const ForestModel& model, std::span<const double> features) {
  if (features.size() != model.n_features) {
    throw Error(Errc::kFeatureDimMismatch,
                "expected " + std::to_string(model.n_features) + " features, got " +
                    std::to_string(features.size()));
  }
  if (model.trees.empty()) {
    throw Error(Errc::kInvalidArgument, "forest has no trees");
  }
  double sum = 0.0;
  for (const DecisionTree& tree : model.trees) sum += tree.predict(features);
  return sum / static_cast<double>(model.trees.size());
}

}  // namespace xmera
