// Copyright 2026 The TAMIS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tamis/eval.hpp"

#include <algorithm>
#include <numeric>

#include "tamis/error.hpp"

namespace tamis {
namespace {

void CheckLabels(std::size_t n, std::span<const std::uint8_t> labels) {
  if (labels.size() != n) throw Error(ErrorCode::kParameter, "label count does not match the score count");
  for (std::uint8_t y : labels) {
    if (y > 1) throw Error(ErrorCode::kParameter, "labels must be 0 or 1");
  }
}

}  // namespace

double Auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  CheckLabels(scores.size(), labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney: sum of midranks of the positives.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double midrank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t k = lo; k < hi; ++k) {
      if (labels[order[k]]) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    lo = hi;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::kUndefinedMetric, "AUROC needs both members and non-members");
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double BalancedAccuracy(std::span<const std::uint8_t> predictions,
                        std::span<const std::uint8_t> labels) {
  CheckLabels(predictions.size(), labels);
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = predictions[i] != 0;
    if (labels[i]) {
      pred ? ++tp : ++fn;
    } else {
      pred ? ++fp : ++tn;
    }
  }
  if (tp + fn == 0 || tn + fp == 0) {
    throw Error(ErrorCode::kUndefinedMetric, "balanced accuracy needs both members and non-members");
  }
  const double tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
  return 0.5 * (tpr + tnr);
}

MetricBundle Evaluate(const ScoreVector& scores, std::span<const std::uint8_t> labels,
                      double threshold, double prior) {
  MetricBundle m;
  m.n = scores.size();
  m.auroc = Auroc(scores.log_scores, labels);
  m.balanced_accuracy_simple = BalancedAccuracy(ActivateSimple(scores, threshold).predictions, labels);
  if (prior < 0.0) {
    const auto members = std::count(labels.begin(), labels.end(), std::uint8_t{1});
    prior = static_cast<double>(members) / static_cast<double>(labels.size());
  }
  m.balanced_accuracy_calibrated =
      BalancedAccuracy(ActivateCalibrated(scores, prior).predictions, labels);
  return m;
}

KeySet StructureKeys(std::span<const Edge> edges) {
  KeySet keys;
  for (const Edge& e : edges) keys.insert(EdgeKey(e));
  return keys;
}

KeySet StructureKeys(std::span<const Family> order) {
  KeySet keys;
  for (const Family& f : order) keys.insert(FamilyKey(f));
  return keys;
}

KeySet StructureKeys(const ShadowWeights& weights) {
  KeySet keys;
  for (const auto& [e, w] : weights.edge_weights) {
    if (w > 0) keys.insert(EdgeKey(e));
  }
  for (const auto& [f, w] : weights.family_weights) {
    if (w > 0) keys.insert(FamilyKey(f));
  }
  return keys;
}

RecoveryMetrics CompareStructures(const KeySet& truth, const KeySet& estimate) {
  std::size_t common = 0;
  for (const auto& key : estimate) common += truth.count(key);
  const std::size_t united = truth.size() + estimate.size() - common;
  const auto ratio = [](std::size_t num, std::size_t den, double empty) {
    return den == 0 ? empty : static_cast<double>(num) / static_cast<double>(den);
  };
  RecoveryMetrics m;
  m.choice_accuracy = ratio(common, truth.size(), 1.0);
  m.recall = m.choice_accuracy;
  m.precision = ratio(common, estimate.size(), truth.empty() ? 1.0 : 0.0);
  m.jaccard = ratio(common, united, 1.0);
  m.perfect_match = truth == estimate;
  return m;
}

}  // namespace tamis
