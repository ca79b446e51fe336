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

#ifndef TAMIS_EVAL_HPP_
#define TAMIS_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tamis/attack.hpp"
#include "tamis/recovery.hpp"
#include "tamis/sdg.hpp"

namespace tamis {

// Probability that a random positive outranks a random negative, ties
// counted one half. Throws kUndefinedMetric unless both classes are present.
double Auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// 0.5 * (TPR + TNR).
double BalancedAccuracy(std::span<const std::uint8_t> predictions,
                        std::span<const std::uint8_t> labels);

struct MetricBundle {
  double auroc = 0.0;
  double balanced_accuracy_simple = 0.0;
  double balanced_accuracy_calibrated = 0.0;
  std::size_t n = 0;
};

// AUROC on the log scores plus both activations. The calibrated prior
// defaults to the empirical member fraction.
MetricBundle Evaluate(const ScoreVector& scores, std::span<const std::uint8_t> labels,
                      double threshold = 0.5, double prior = -1.0);

struct RecoveryMetrics {
  double choice_accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double jaccard = 0.0;
  bool perfect_match = false;
};

using KeySet = std::set<std::string>;

KeySet StructureKeys(std::span<const Edge> edges);
KeySet StructureKeys(std::span<const Family> order);
// Keys with a nonzero shadow count.
KeySet StructureKeys(const ShadowWeights& weights);

// choice_accuracy is the share of true choices (edges, or one family per node)
// that the estimate reproduces exactly.
RecoveryMetrics CompareStructures(const KeySet& truth, const KeySet& estimate);

}  // namespace tamis

#endif  // TAMIS_EVAL_HPP_
