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

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

// Indices into `pool` of the k nearest neighbours of pool[self] (self
// excluded), nearest first, ties broken by index.
std::vector<std::size_t> nearest(std::span<const LabeledPoint* const> pool,
                                 std::size_t self, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(pool.size());
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (j == self) continue;
    dist.emplace_back(squared_distance(pool[self]->features, pool[j]->features), j);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                    dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

}  // namespace

std::vector<LabeledPoint> adasyn(std::span<const LabeledPoint> points,
                                 int k_neighbors, double target_ratio,
                                 std::uint64_t seed) {
  if (k_neighbors < 1) {
    throw Error(Errc::kInvalidArgument, "k_neighbors must be at least 1");
  }
  if (!(target_ratio > 0.0)) {
    throw Error(Errc::kInvalidArgument, "target_ratio must be positive");
  }
  std::vector<const LabeledPoint*> all;
  std::array<std::size_t, 2> counts{0, 0};
  for (const LabeledPoint& p : points) {
    if (p.label != 0 && p.label != 1) {
      throw Error(Errc::kInvalidArgument, "label must be 0 or 1");
    }
    ++counts[static_cast<std::size_t>(p.label)];
    all.push_back(&p);
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw Error(Errc::kSingleClass, "oversampling needs both classes");
  }

  std::vector<LabeledPoint> out(points.begin(), points.end());
  const int minority_label = counts[1] < counts[0] ? 1 : 0;
  const std::size_t n_min = counts[static_cast<std::size_t>(minority_label)];
  const std::size_t n_maj = counts[static_cast<std::size_t>(1 - minority_label)];
  const long long target =
      std::llround(static_cast<double>(n_maj) * target_ratio);
  const long long to_generate = target - static_cast<long long>(n_min);
  if (to_generate <= 0) return out;

  std::vector<std::size_t> minority;  // indices into `all`
  std::vector<const LabeledPoint*> minority_points;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i]->label == minority_label) {
      minority.push_back(i);
      minority_points.push_back(all[i]);
    }
  }

  // Difficulty weights: majority share among the k nearest of all points.
  const auto k = static_cast<std::size_t>(k_neighbors);
  std::vector<double> weight(n_min, 0.0);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < n_min; ++i) {
    const std::vector<std::size_t> nn = nearest(all, minority[i], k);
    std::size_t majority = 0;
    for (std::size_t j : nn) majority += all[j]->label != minority_label;
    weight[i] = nn.empty() ? 0.0 : static_cast<double>(majority) /
                                       static_cast<double>(nn.size());
    weight_sum += weight[i];
  }
  if (weight_sum == 0.0) {
    std::fill(weight.begin(), weight.end(), 1.0);
    weight_sum = static_cast<double>(n_min);
  }

  // Largest-remainder apportionment of the synthetic budget.
  std::vector<std::size_t> share(n_min, 0);
  std::vector<std::pair<double, std::size_t>> remainder;
  long long assigned = 0;
  for (std::size_t i = 0; i < n_min; ++i) {
    const double exact =
        weight[i] / weight_sum * static_cast<double>(to_generate);
    share[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += static_cast<long long>(share[i]);
    remainder.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < to_generate; ++r, ++assigned) {
    ++share[remainder[r % remainder.size()].second];
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lambda(0.0, 1.0);
  std::size_t serial = 0;
  for (std::size_t i = 0; i < n_min; ++i) {
    if (share[i] == 0) continue;
    const LabeledPoint& parent = *minority_points[i];
    const std::vector<std::size_t> nn = nearest(minority_points, i, k);
    for (std::size_t g = 0; g < share[i]; ++g) {
      const LabeledPoint* neighbour = &parent;
      if (!nn.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, nn.size() - 1);
        neighbour = minority_points[nn[pick(rng)]];
      }
      const double l = lambda(rng);
      LabeledPoint synth;
      synth.id = "syn:" + std::to_string(serial++) + ":" + parent.id;
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        synth.features[f] =
            parent.features[f] + l * (neighbour->features[f] - parent.features[f]);
      }
      synth.label = minority_label;
      synth.attack_kind = parent.attack_kind;
      synth.synthetic = true;
      synth.parents = {parent.id, neighbour->id};
      out.push_back(std::move(synth));
    }
  }
  return out;
}

}  // namespace xmera
