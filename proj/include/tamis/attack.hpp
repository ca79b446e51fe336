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

#ifndef TAMIS_ATTACK_HPP_
#define TAMIS_ATTACK_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tamis/data.hpp"
#include "tamis/recovery.hpp"
#include "tamis/sdg.hpp"

namespace tamis {

enum class AttackKind {
  kTamisMst,
  kMamaMiaMst,
  kHybridMst,
  kTamisMstAvg,
  kMarginalsSigma,
  kMarginalsPi,
  kTamisPb,
  kMamaMiaPb,
  kHybridPb,
};

std::string_view AttackName(AttackKind kind);
AttackKind ParseAttack(std::string_view name);
// Generator family an attack is designed against.
Method AttackTarget(AttackKind kind);
std::vector<AttackKind> AllAttacks();

// Raw attack scores Lambda(x) > 0, kept as natural logs.
struct ScoreVector {
  std::string attack;
  std::vector<double> log_scores;
  // Row index into the attacked records, or household id after aggregation.
  std::vector<std::int64_t> ids;

  std::size_t size() const { return log_scores.size(); }
  double Value(std::size_t i) const;
  std::vector<double> Values() const;

  static ScoreVector FromValues(std::string attack, std::span<const double> values);
};

// Density-ratio attack on the tree factorization (product over nodes and edges).
ScoreVector TamisMst(const Dataset& records, std::span<const Edge> tree, const Dataset& synth,
                     const Dataset& aux);
// Density-ratio attack on the network factorization.
ScoreVector TamisPb(const Dataset& records, std::span<const Family> network, const Dataset& synth,
                    const Dataset& aux);
// Weighted average of 2-way ratios, normalized by the total weight.
ScoreVector MamaMiaMst(const Dataset& records, const ShadowWeights& weights, const Dataset& synth,
                       const Dataset& aux);
ScoreVector MamaMiaPb(const Dataset& records, const ShadowWeights& weights, const Dataset& synth,
                      const Dataset& aux);
// Uniform average of 2-way ratios over the tree edges.
ScoreVector HybridMst(const Dataset& records, std::span<const Edge> tree, const Dataset& synth,
                      const Dataset& aux);
// Uniform average of conditional ratios over the network families.
ScoreVector HybridPb(const Dataset& records, std::span<const Family> network, const Dataset& synth,
                     const Dataset& aux);
ScoreVector TamisMstAvg(const Dataset& records, std::span<const Edge> tree, const Dataset& synth,
                        const Dataset& aux);
ScoreVector MarginalsSigma(const Dataset& records, const Dataset& synth, const Dataset& aux);
ScoreVector MarginalsPi(const Dataset& records, const Dataset& synth, const Dataset& aux);

struct AttackInputs {
  const Dataset* records = nullptr;
  const Dataset* synth = nullptr;
  const Dataset* aux = nullptr;
  std::vector<Edge> tree;
  std::vector<Family> network;
  const ShadowWeights* weights = nullptr;
};

ScoreVector ScoreAttack(AttackKind kind, const AttackInputs& inputs);

// Household score = mean of the raw member scores. Output sorted by id.
ScoreVector AggregateHouseholds(const ScoreVector& scores, std::span<const HouseholdId> households);

enum class ActivationRegime { kSimple, kCalibrated };

struct ActivationConfig {
  ActivationRegime regime = ActivationRegime::kSimple;
  double threshold = 0.5;
  std::optional<double> prior;
};

struct Activation {
  std::vector<double> probabilities;
  std::vector<std::uint8_t> predictions;
  // Calibration found no spread in the scores; everything predicted 0.
  bool degenerate = false;
};

// p = 2 Sigmoid(Lambda) - 1, predicted member iff p >= threshold.
Activation ActivateSimple(const ScoreVector& scores, double threshold = 0.5);

// Standardize (population std), shift by the (1 - prior) quantile, sigmoid,
// threshold 0.5. The predicted-positive rate matches the prior within 1/N.
Activation ActivateCalibrated(const ScoreVector& scores, double prior);

Activation Activate(const ScoreVector& scores, const ActivationConfig& cfg);

// Quantile with linear interpolation between order statistics (inclusive).
double Quantile(std::vector<double> values, double q);

// CSV with header record_id,household_id,raw_score,probability,prediction,label.
std::string FormatScoresCsv(const ScoreVector& scores, const Activation& activation,
                            std::span<const HouseholdId> households = {},
                            std::span<const std::uint8_t> labels = {});

}  // namespace tamis

#endif  // TAMIS_ATTACK_HPP_
