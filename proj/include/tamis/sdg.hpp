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

#ifndef TAMIS_SDG_HPP_
#define TAMIS_SDG_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tamis/data.hpp"
#include "tamis/dp.hpp"
#include "tamis/marginals.hpp"
#include "tamis/random.hpp"

namespace tamis {

enum class Method { kMst, kPrivBayes };

std::string_view MethodName(Method method);
Method ParseMethod(std::string_view name);

// Share of the privacy budget given to structure selection and to the
// measurement of the model statistics.
struct BudgetSplit {
  double selection = 1.0 / 3.0;
  double measurement = 2.0 / 3.0;

  void Validate() const;
};

// How the PrivBayes score reads its first term: the joint P(X_i, Pi_i)
// (default) or the conditional P(X_i | Pi_i).
enum class PrivBayesScoreForm { kJoint, kConditional };

struct GeneratorConfig {
  Method method = Method::kMst;
  DpParams dp;
  std::size_t n_synth = 10'000;
  BudgetSplit split;
  // Largest parent set PrivBayes will consider.
  std::size_t max_parents = 3;
  PrivBayesScoreForm score_form = PrivBayesScoreForm::kJoint;
};

// Undirected edge, stored with first < second.
struct Edge {
  AttrIndex first = 0;
  AttrIndex second = 0;

  auto operator<=>(const Edge&) const = default;
};

Edge MakeEdge(AttrIndex a, AttrIndex b);

// A node with its (sorted) parent set.
struct Family {
  AttrIndex node = 0;
  AttrList parents;

  auto operator<=>(const Family&) const = default;
};

struct TreeModel {
  Domain domain;
  std::vector<Edge> edges;
  std::vector<MarginalTable> node_tables;  // one per attribute
  std::vector<MarginalTable> edge_tables;  // aligned with edges, attrs (first, second)
  BudgetLedger ledger;
};

struct BayesNetModel {
  Domain domain;
  std::vector<Family> order;  // topological
  std::vector<ConditionalTable> cond_tables;  // aligned with order
  double domain_threshold = 0.0;
  BudgetLedger ledger;
};

using SynthModel = std::variant<TreeModel, BayesNetModel>;

bool IsSpanningTree(std::size_t num_nodes, std::span<const Edge> edges);
bool IsTopologicalOrder(std::size_t num_nodes, std::span<const Family> order);

// ---------------------------------------------------------------------------
// MST

// Sum over the label product of |P(i, j) - P(i) P(j)|. With `noisy_one_way`
// (one table per attribute) the products use those tables instead.
double MstEdgeScore(const Dataset& ds, AttrIndex i, AttrIndex j,
                    const std::vector<MarginalTable>* noisy_one_way = nullptr);

// Score of every pair (i < j), listed in lexicographic pair order.
std::vector<double> MstScoreList(const Dataset& ds,
                                 const std::vector<MarginalTable>* noisy_one_way = nullptr);

// Exact maximum spanning tree: Kruskal over (-score, pair) order. `scores` is
// in the pair order produced by MstScoreList.
std::vector<Edge> MaximumSpanningTree(std::size_t num_nodes, std::span<const double> scores);

struct MstSelection {
  std::vector<Edge> edges;  // in selection order
  std::vector<MarginalTable> one_way;  // noisy 1-way tables used for scoring
};

// Noisy 1-way measurement followed by |V|-1 exponential-mechanism edge draws.
// Charges `ledger` when one is given.
MstSelection SelectMstStructure(const Dataset& train, const DpParams& dp,
                                const BudgetSplit& split, Rng& rng,
                                BudgetLedger* ledger = nullptr);

TreeModel FitMst(const Dataset& train, const GeneratorConfig& cfg);

// Tree model on the given edges with floored empirical tables of `ds`.
TreeModel EmpiricalTreeModel(const Dataset& ds, std::span<const Edge> edges, double floor);

// log of prod_i mu_i(x)^(1 - |N(i)|) prod_(i,j) mu_ij(x).
double TreeLogDensity(const TreeModel& model, std::span<const Value> record);
double TreeDensity(const TreeModel& model, std::span<const Value> record);

Dataset SampleTree(const TreeModel& model, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// PrivBayes

double PrivBayesScore(const Dataset& ds, AttrIndex child, const AttrList& parents,
                      PrivBayesScoreForm form = PrivBayesScoreForm::kJoint);

// theta * epsilon * rows; infinite for the noiseless sentinel.
double PrivBayesDomainThreshold(const DpParams& dp, std::size_t rows);

struct PrivBayesOptions {
  BudgetSplit split;
  std::size_t max_parents = 3;
  PrivBayesScoreForm score_form = PrivBayesScoreForm::kJoint;
};

// Greedy network selection: uniform first node, then one exponential-mechanism
// draw per remaining node over admissible (node, parent set) candidates.
std::vector<Family> SelectPrivBayesStructure(const Dataset& train, const DpParams& dp,
                                             const PrivBayesOptions& options, Rng& rng,
                                             BudgetLedger* ledger = nullptr);

BayesNetModel FitPrivBayes(const Dataset& train, const GeneratorConfig& cfg);

BayesNetModel EmpiricalBayesModel(const Dataset& ds, std::span<const Family> order, double floor);

double BayesLogDensity(const BayesNetModel& model, std::span<const Value> record);
double BayesDensity(const BayesNetModel& model, std::span<const Value> record);

Dataset SampleBayes(const BayesNetModel& model, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------

SynthModel Fit(const Dataset& train, const GeneratorConfig& cfg);
Dataset Sample(const SynthModel& model, std::size_t n, std::uint64_t seed);

nlohmann::json ModelToJson(const SynthModel& model);
SynthModel ModelFromJson(const nlohmann::json& j);

// Structure keys: "i-j" for edges, "i|j1,j2" for families ("i|" if no parents).
std::string EdgeKey(const Edge& e);
std::string FamilyKey(const Family& f);
Edge ParseEdgeKey(std::string_view key);
Family ParseFamilyKey(std::string_view key);

}  // namespace tamis

#endif  // TAMIS_SDG_HPP_
