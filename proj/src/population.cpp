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

#include "tamis/population.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "tamis/error.hpp"

namespace tamis {
namespace {

std::vector<double> RandomDistribution(std::size_t n, double concentration, Rng& rng) {
  std::vector<double> probs(n);
  double total = 0.0;
  for (double& p : probs) {
    p = std::exp(concentration * rng.Gaussian());
    total += p;
  }
  for (double& p : probs) p /= total;
  return probs;
}

}  // namespace

TreeModel RandomTreeModel(const Domain& domain, double concentration, Rng& rng) {
  const std::size_t d = domain.size();
  if (d == 0) throw Error(ErrorCode::kConfiguration, "random tree needs at least one attribute");
  // Random recursive tree over a random node permutation.
  std::vector<AttrIndex> perm(d);
  std::iota(perm.begin(), perm.end(), AttrIndex{0});
  rng.Shuffle(perm);
  TreeModel model;
  model.domain = domain;
  for (std::size_t k = 1; k < d; ++k) {
    model.edges.push_back(MakeEdge(perm[k], perm[rng.Below(k)]));
  }
  std::sort(model.edges.begin(), model.edges.end());

  std::vector<std::vector<std::pair<AttrIndex, std::size_t>>> adjacent(d);
  for (std::size_t k = 0; k < model.edges.size(); ++k) {
    adjacent[model.edges[k].first].push_back({model.edges[k].second, k});
    adjacent[model.edges[k].second].push_back({model.edges[k].first, k});
  }
  model.node_tables.resize(d);
  model.edge_tables.resize(model.edges.size());
  model.node_tables[0] = MarginalTable({0}, {domain.cardinality(0)},
                                       RandomDistribution(domain.cardinality(0), concentration, rng), 0);
  std::vector<bool> visited(d, false);
  visited[0] = true;
  std::queue<AttrIndex> frontier;
  frontier.push(0);
  while (!frontier.empty()) {
    const AttrIndex parent = frontier.front();
    frontier.pop();
    for (const auto& [child, k] : adjacent[parent]) {
      if (visited[child]) continue;
      visited[child] = true;
      const Edge& e = model.edges[k];
      const std::size_t np = domain.cardinality(parent);
      const std::size_t nc = domain.cardinality(child);
      const std::size_t n_second = domain.cardinality(e.second);
      std::vector<double> joint(np * nc);
      std::vector<double> child_probs(nc, 0.0);
      for (std::size_t pv = 0; pv < np; ++pv) {
        const auto cond = RandomDistribution(nc, concentration, rng);
        for (std::size_t cv = 0; cv < nc; ++cv) {
          const double p = model.node_tables[parent].at(pv) * cond[cv];
          joint[e.first == parent ? pv * n_second + cv : cv * n_second + pv] = p;
          child_probs[cv] += p;
        }
      }
      model.edge_tables[k] = MarginalTable({e.first, e.second},
                                           {domain.cardinality(e.first), domain.cardinality(e.second)},
                                           std::move(joint), 0);
      model.node_tables[child] = MarginalTable({child}, {nc}, std::move(child_probs), 0);
      frontier.push(child);
    }
  }
  return model;
}

BayesNetModel RandomBayesModel(const Domain& domain, std::size_t max_parents,
                               double concentration, Rng& rng) {
  const std::size_t d = domain.size();
  std::vector<AttrIndex> perm(d);
  std::iota(perm.begin(), perm.end(), AttrIndex{0});
  rng.Shuffle(perm);
  BayesNetModel model;
  model.domain = domain;
  model.domain_threshold = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < d; ++k) {
    Family f{perm[k], {}};
    const std::size_t n_parents = rng.Below(std::min(max_parents, k) + 1);
    for (std::size_t idx : rng.SampleWithoutReplacement(k, n_parents)) f.parents.push_back(perm[idx]);
    std::sort(f.parents.begin(), f.parents.end());
    std::vector<std::size_t> parent_shape;
    std::size_t configs = 1;
    for (AttrIndex p : f.parents) {
      parent_shape.push_back(domain.cardinality(p));
      configs *= domain.cardinality(p);
    }
    const std::size_t nc = domain.cardinality(f.node);
    std::vector<double> probs;
    for (std::size_t c = 0; c < configs; ++c) {
      const auto dist = RandomDistribution(nc, concentration, rng);
      probs.insert(probs.end(), dist.begin(), dist.end());
    }
    model.cond_tables.emplace_back(f.node, f.parents, parent_shape, nc, std::move(probs), 0);
    model.order.push_back(std::move(f));
  }
  return model;
}

Population SimulatePopulation(const PopulationSpec& opt) {
  if (opt.attributes == 0 || opt.min_cardinality == 0 ||
      opt.min_cardinality > opt.max_cardinality || opt.max_household_size == 0 ||
      opt.household_growth < 0.0 || opt.household_growth >= 1.0) {
    throw Error(ErrorCode::kConfiguration, "invalid population specification");
  }
  Rng rng(opt.seed);
  std::vector<std::size_t> cards(opt.attributes);
  for (auto& n : cards) {
    n = opt.min_cardinality + rng.Below(opt.max_cardinality - opt.min_cardinality + 1);
  }
  const Domain domain = Domain::FromCardinalities(cards);
  Population pop;
  pop.truth = RandomTreeModel(domain, opt.concentration, rng);

  const std::size_t d = opt.attributes;
  const std::size_t shared = std::min(opt.shared_attributes, d);
  // Draw more records than needed in one pass; households consume them in order.
  const Dataset pool = SampleTree(pop.truth, opt.rows, rng.NextU64());
  std::vector<Value> cells;
  cells.reserve(opt.rows * d);
  std::vector<HouseholdId> households;
  households.reserve(opt.rows);
  HouseholdId id = 0;
  std::size_t r = 0;
  while (r < opt.rows) {
    std::size_t size = 1;
    while (size < opt.max_household_size && rng.Uniform() < opt.household_growth) ++size;
    size = std::min(size, opt.rows - r);
    const std::span<const Value> head = pool.row(r);
    for (std::size_t m = 0; m < size; ++m, ++r) {
      const auto rec = pool.row(r);
      for (std::size_t a = 0; a < d; ++a) cells.push_back(a < shared ? head[a] : rec[a]);
      households.push_back(id);
    }
    ++id;
  }
  pop.data = Dataset(domain, std::move(cells), std::move(households));
  return pop;
}

nlohmann::json PopulationSpecToJson(const PopulationSpec& opt) {
  return {{"rows", opt.rows},
          {"attributes", opt.attributes},
          {"min_cardinality", opt.min_cardinality},
          {"max_cardinality", opt.max_cardinality},
          {"max_household_size", opt.max_household_size},
          {"household_growth", opt.household_growth},
          {"shared_attributes", opt.shared_attributes},
          {"concentration", opt.concentration},
          {"seed", opt.seed}};
}

PopulationSpec PopulationSpecFromJson(const nlohmann::json& j) {
  PopulationSpec opt;
  opt.rows = j.value("rows", opt.rows);
  opt.attributes = j.value("attributes", opt.attributes);
  opt.min_cardinality = j.value("min_cardinality", opt.min_cardinality);
  opt.max_cardinality = j.value("max_cardinality", opt.max_cardinality);
  opt.max_household_size = j.value("max_household_size", opt.max_household_size);
  opt.household_growth = j.value("household_growth", opt.household_growth);
  opt.shared_attributes = j.value("shared_attributes", opt.shared_attributes);
  opt.concentration = j.value("concentration", opt.concentration);
  opt.seed = j.value("seed", opt.seed);
  return opt;
}

}  // namespace tamis
