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

#ifndef TAMIS_RECOVERY_HPP_
#define TAMIS_RECOVERY_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "json.hpp"
#include "tamis/data.hpp"
#include "tamis/dp.hpp"
#include "tamis/sdg.hpp"

namespace tamis {

// MAMA-MIA weights: how many shadow runs selected each edge (MST) or each
// (node, parent set) family (PrivBayes).
struct ShadowWeights {
  Method method = Method::kMst;
  std::size_t runs = 0;
  std::size_t num_attributes = 0;
  std::map<Edge, std::uint64_t> edge_weights;
  std::map<Family, std::uint64_t> family_weights;

  std::uint64_t Total() const;
};

struct ShadowConfig {
  std::size_t runs = 50;
  std::size_t subset_size = 10'000;
  // Parameters of the attacked generator.
  DpParams dp;
  BudgetSplit split;
  std::size_t max_parents = 3;
  PrivBayesScoreForm score_form = PrivBayesScoreForm::kJoint;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// Work done by RecoverTree, for cost accounting.
struct RecoveryCost {
  std::size_t one_way_tables = 0;
  std::size_t two_way_tables = 0;
  std::size_t spanning_tree_runs = 0;
};

// Noiseless MST structure of a synthetic dataset: exact edge scores from its
// 1- and 2-way marginals, then one maximum spanning tree. Edges are sorted.
std::vector<Edge> RecoverTree(const Dataset& synth, RecoveryCost* cost = nullptr);

// One run of the PrivBayes selection step on the synthetic data, with the
// attacked generator's parameters. Seeded by dp.seed.
std::vector<Family> RecoverBayesNet(const Dataset& synth, const DpParams& dp,
                                    const PrivBayesOptions& options = {});

// K selection runs on uniform random subsets of aux (without replacement
// within a run, independent across runs).
ShadowWeights ComputeShadowWeights(const Dataset& aux, Method method, const ShadowConfig& cfg);

// Indicator weights of one structure (1 per edge or family).
ShadowWeights IndicatorWeights(std::size_t num_attributes, std::span<const Edge> edges);
ShadowWeights IndicatorWeights(std::size_t num_attributes, std::span<const Family> order);

nlohmann::json ShadowWeightsToJson(const ShadowWeights& w);
ShadowWeights ShadowWeightsFromJson(const nlohmann::json& j);

}  // namespace tamis

#endif  // TAMIS_RECOVERY_HPP_
