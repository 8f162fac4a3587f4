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
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "xmera/detector.hpp"

namespace xmera {

RocCurve roc_auc(std::span<const ScoredLabel> scores) {
  std::size_t n_pos = 0;
  for (const ScoredLabel& s : scores) {
    if (s.label != 0 && s.label != 1) {
      throw Error(Errc::kInvalidArgument, "label must be 0 or 1");
    }
    if (std::isnan(s.score)) throw Error(Errc::kInvalidArgument, "NaN score");
    n_pos += static_cast<std::size_t>(s.label);
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(Errc::kSingleClass, "ROC needs both positive and negative labels");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a].score < scores[b].score;
  });

  // Mann-Whitney U with mid-ranks for ties.
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (scores[order[t]].label == 1) positive_rank_sum += mid_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  const double n = static_cast<double>(n_neg);
  RocCurve curve;
  curve.auc = (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);

  // Threshold sweep from the highest score down, one point per distinct score.
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = order.size(); i > 0;) {
    const double threshold = scores[order[i - 1]].score;
    while (i > 0 && scores[order[i - 1]].score == threshold) {
      (scores[order[i - 1]].label == 1 ? tp : fp) += 1;
      --i;
    }
    curve.points.push_back({static_cast<double>(fp) / n,
                            static_cast<double>(tp) / p, threshold});
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) *
            (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  char buf[64];
  out << "fpr,tpr,threshold\n";
  for (const RocPoint& pt : curve.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", pt.fpr, pt.tpr);
    out << buf;
    if (std::isinf(pt.threshold)) {
      out << "inf\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g\n", pt.threshold);
      out << buf;
    }
  }
  std::snprintf(buf, sizeof buf, "#auc=%.17g\n", curve.auc);
  out << buf;
}

}  // namespace xmera
