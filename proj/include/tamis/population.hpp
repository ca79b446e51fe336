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

#ifndef TAMIS_POPULATION_HPP_
#define TAMIS_POPULATION_HPP_

#include <cstddef>
#include <cstdint>

#include "json.hpp"
#include "tamis/data.hpp"
#include "tamis/random.hpp"
#include "tamis/sdg.hpp"

namespace tamis {

// Synthetic census-like population with households, used as attacker
// auxiliary data when no real dataset is supplied.
struct PopulationSpec {
  std::size_t rows = 50'000;
  std::size_t attributes = 8;
  std::size_t min_cardinality = 2;
  std::size_t max_cardinality = 8;
  std::size_t max_household_size = 10;
  // Probability that a household grows by one more member.
  double household_growth = 0.7;
  // The first `shared_attributes` attributes are copied from the household head.
  std::size_t shared_attributes = 3;
  // Larger values give more skewed, more strongly dependent tables.
  double concentration = 1.5;
  std::uint64_t seed = 0;
};

struct Population {
  Dataset data;
  TreeModel truth;
};

Population SimulatePopulation(const PopulationSpec& opt);

// Random tree-structured model with consistent tables over `domain`.
TreeModel RandomTreeModel(const Domain& domain, double concentration, Rng& rng);

// Random network: a random topological order, each node with up to
// `max_parents` random earlier parents.
BayesNetModel RandomBayesModel(const Domain& domain, std::size_t max_parents,
                               double concentration, Rng& rng);

nlohmann::json PopulationSpecToJson(const PopulationSpec& opt);
PopulationSpec PopulationSpecFromJson(const nlohmann::json& j);

}  // namespace tamis

#endif  // TAMIS_POPULATION_HPP_
