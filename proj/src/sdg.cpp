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

#include "tamis/sdg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <queue>

#include "tamis/error.hpp"

namespace tamis {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

void RequireUsableDomain(const Dataset& ds, std::string_view what) {
  for (std::size_t i = 0; i < ds.num_attributes(); ++i) {
    if (ds.domain().cardinality(i) == 0) {
      throw Error(ErrorCode::kConfiguration, std::string(what) + ": attribute '" +
                                                 ds.domain().attribute(i).name +
                                                 "' has an empty domain");
    }
  }
  if (ds.empty()) throw Error(ErrorCode::kEstimation, std::string(what) + ": empty training data");
}

// Clips negatives and normalizes; all-zero input becomes uniform.
std::vector<double> ClipNormalize(std::vector<double> values) {
  double total = 0.0;
  for (double& v : values) {
    if (!(v > 0.0)) v = 0.0;
    total += v;
  }
  if (total > 0.0) {
    for (double& v : values) v /= total;
  } else if (!values.empty()) {
    std::fill(values.begin(), values.end(), 1.0 / static_cast<double>(values.size()));
  }
  return values;
}

std::vector<double> ToDouble(const std::vector<std::uint64_t>& counts) {
  return {counts.begin(), counts.end()};
}

std::vector<std::size_t> ShapeOf(const Domain& domain, const AttrList& attrs) {
  std::vector<std::size_t> shape;
  for (AttrIndex a : attrs) shape.push_back(domain.cardinality(a));
  return shape;
}

std::size_t PairCount(std::size_t d) { return d * (d - 1) / 2; }

// Position of pair (i < j) in lexicographic pair order.
std::size_t PairIndex(std::size_t d, std::size_t i, std::size_t j) {
  return i * d - i * (i + 1) / 2 + (j - i - 1);
}

Value SampleCategorical(std::span<const double> probs, Rng& rng) {
  double total = 0.0;
  for (double p : probs) total += p;
  double target = rng.Uniform() * total;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    target -= probs[k];
    if (target < 0.0) return static_cast<Value>(k);
  }
  // Rounding fell through; take the last category with mass.
  for (std::size_t k = probs.size(); k-- > 0;) {
    if (probs[k] > 0.0) return static_cast<Value>(k);
  }
  return 0;
}

nlohmann::json ThresholdToJson(double t) {
  if (std::isinf(t)) return "inf";
  return t;
}

double ThresholdFromJson(const nlohmann::json& j) {
  if (j.is_string()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

}  // namespace

std::string_view MethodName(Method method) {
  return method == Method::kMst ? "MST" : "PrivBayes";
}

Method ParseMethod(std::string_view name) {
  if (name == "MST" || name == "mst") return Method::kMst;
  if (name == "PrivBayes" || name == "privbayes" || name == "PB") return Method::kPrivBayes;
  throw Error(ErrorCode::kConfiguration, "unknown method '" + std::string(name) + "'");
}

void BudgetSplit::Validate() const {
  if (selection < 0.0 || measurement < 0.0 || std::abs(selection + measurement - 1.0) > 1e-9) {
    throw Error(ErrorCode::kConfiguration, "budget split fractions must be nonnegative and sum to 1");
  }
}

Edge MakeEdge(AttrIndex a, AttrIndex b) {
  if (a == b) throw Error(ErrorCode::kConfiguration, "self-loop edge");
  return a < b ? Edge{a, b} : Edge{b, a};
}

bool IsSpanningTree(std::size_t num_nodes, std::span<const Edge> edges) {
  if (num_nodes == 0) return edges.empty();
  if (edges.size() != num_nodes - 1) return false;
  DisjointSets sets(num_nodes);
  for (const Edge& e : edges) {
    if (e.first >= num_nodes || e.second >= num_nodes || e.first == e.second) return false;
    if (!sets.Union(e.first, e.second)) return false;
  }
  return true;
}

bool IsTopologicalOrder(std::size_t num_nodes, std::span<const Family> order) {
  if (order.size() != num_nodes) return false;
  std::vector<bool> placed(num_nodes, false);
  for (const Family& f : order) {
    if (f.node >= num_nodes || placed[f.node]) return false;
    for (AttrIndex p : f.parents) {
      if (p >= num_nodes || !placed[p]) return false;
    }
    placed[f.node] = true;
  }
  return true;
}

// ---------------------------------------------------------------------------
// MST

double MstEdgeScore(const Dataset& ds, AttrIndex i, AttrIndex j,
                    const std::vector<MarginalTable>* noisy_one_way) {
  if (i == j) throw Error(ErrorCode::kConfiguration, "edge score needs two distinct attributes");
  const Edge e = MakeEdge(i, j);
  const MarginalTable joint = Marginal(ds, {e.first, e.second});
  std::vector<double> pa;
  std::vector<double> pb;
  if (noisy_one_way) {
    pa = noisy_one_way->at(e.first).probs();
    pb = noisy_one_way->at(e.second).probs();
  } else {
    pa = Marginal(ds, {e.first}).probs();
    pb = Marginal(ds, {e.second}).probs();
  }
  double score = 0.0;
  for (std::size_t a = 0; a < pa.size(); ++a) {
    for (std::size_t b = 0; b < pb.size(); ++b) {
      score += std::abs(joint.at(a * pb.size() + b) - pa[a] * pb[b]);
    }
  }
  return score;
}

std::vector<double> MstScoreList(const Dataset& ds, const std::vector<MarginalTable>* noisy_one_way) {
  const std::size_t d = ds.num_attributes();
  std::vector<double> scores;
  scores.reserve(PairCount(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) scores.push_back(MstEdgeScore(ds, i, j, noisy_one_way));
  }
  return scores;
}

std::vector<Edge> MaximumSpanningTree(std::size_t num_nodes, std::span<const double> scores) {
  if (scores.size() != PairCount(num_nodes)) {
    throw Error(ErrorCode::kConfiguration, "score list does not match the number of pairs");
  }
  std::vector<Edge> pairs;
  pairs.reserve(scores.size());
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t j = i + 1; j < num_nodes; ++j) pairs.push_back({i, j});
  }
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Pair order is already lexicographic, so a stable sort breaks ties by pair.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  DisjointSets sets(num_nodes);
  std::vector<Edge> tree;
  for (std::size_t k : order) {
    if (sets.Union(pairs[k].first, pairs[k].second)) {
      tree.push_back(pairs[k]);
      if (tree.size() + 1 == num_nodes) break;
    }
  }
  return tree;
}

MstSelection SelectMstStructure(const Dataset& train, const DpParams& dp, const BudgetSplit& split,
                                Rng& rng, BudgetLedger* ledger) {
  dp.Validate();
  split.Validate();
  const std::size_t d = train.num_attributes();
  if (d < 2) throw Error(ErrorCode::kConfiguration, "MST needs at least two attributes");
  RequireUsableDomain(train, "MST");
  const double n = static_cast<double>(train.rows());
  const bool noiseless = dp.noiseless();
  const double rho = noiseless ? 0.0 : ZcdpRho(dp.epsilon, dp.delta);
  // The d one-way and d-1 two-way tables share the measurement budget evenly.
  const double table_share = split.measurement / static_cast<double>(2 * d - 1);
  const double step_share = split.selection / static_cast<double>(d - 1);

  MstSelection out;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> counts = ToDouble(CountTable(train, {i}));
    if (!noiseless) {
      const double sigma = GaussianSigmaForRho(rho * table_share, 1.0);
      const auto noise = GaussianNoise(sigma, counts.size(), rng.NextU64());
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += noise[k];
    }
    const std::size_t cells = counts.size();
    out.one_way.emplace_back(AttrList{i}, std::vector<std::size_t>{cells},
                             ClipNormalize(std::move(counts)), train.rows());
    if (ledger) {
      ledger->Spend("measure 1-way " + std::to_string(i), table_share, table_share, "gaussian");
    }
  }

  const std::vector<double> scores = MstScoreList(train, &out.one_way);
  const double step_epsilon =
      noiseless ? kInfiniteEpsilon : ExponentialEpsilonForRho(rho * step_share);
  const double sensitivity = 2.0 / n;
  DisjointSets sets(d);
  std::vector<Edge> candidates;
  std::vector<double> candidate_scores;
  for (std::size_t step = 0; step + 1 < d; ++step) {
    candidates.clear();
    candidate_scores.clear();
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) {
        if (sets.Find(i) != sets.Find(j)) {
          candidates.push_back({i, j});
          candidate_scores.push_back(scores[PairIndex(d, i, j)]);
        }
      }
    }
    const std::size_t pick = ExponentialMechanism(candidate_scores, step_epsilon, sensitivity, rng);
    sets.Union(candidates[pick].first, candidates[pick].second);
    out.edges.push_back(candidates[pick]);
    if (ledger) {
      ledger->Spend("select edge " + std::to_string(step), step_share, step_share, "exponential");
    }
  }
  return out;
}

TreeModel FitMst(const Dataset& train, const GeneratorConfig& cfg) {
  Rng rng(cfg.dp.seed);
  TreeModel model;
  model.domain = train.domain();
  model.ledger = BudgetLedger(cfg.dp);
  MstSelection selection = SelectMstStructure(train, cfg.dp, cfg.split, rng, &model.ledger);

  const std::size_t d = train.num_attributes();
  const bool noiseless = cfg.dp.noiseless();
  const double rho = noiseless ? 0.0 : ZcdpRho(cfg.dp.epsilon, cfg.dp.delta);
  const double table_share = cfg.split.measurement / static_cast<double>(2 * d - 1);

  model.edges = selection.edges;
  std::sort(model.edges.begin(), model.edges.end());
  std::vector<MarginalTable> measured;
  for (const Edge& e : model.edges) {
    const AttrList attrs{e.first, e.second};
    std::vector<double> counts = ToDouble(CountTable(train, attrs));
    if (!noiseless) {
      const double sigma = GaussianSigmaForRho(rho * table_share, 1.0);
      const auto noise = GaussianNoise(sigma, counts.size(), rng.NextU64());
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += noise[k];
    }
    measured.emplace_back(attrs, ShapeOf(train.domain(), attrs), ClipNormalize(std::move(counts)),
                          train.rows());
    model.ledger.Spend("measure 2-way " + EdgeKey(e), table_share, table_share, "gaussian");
  }

  // Make node and edge tables mutually consistent by propagating from the
  // root along the tree: each edge keeps its measured conditional of child
  // given parent, each node gets the implied marginal.
  std::vector<std::vector<std::pair<AttrIndex, std::size_t>>> adjacent(d);
  for (std::size_t k = 0; k < model.edges.size(); ++k) {
    adjacent[model.edges[k].first].push_back({model.edges[k].second, k});
    adjacent[model.edges[k].second].push_back({model.edges[k].first, k});
  }
  for (auto& list : adjacent) std::sort(list.begin(), list.end());
  model.node_tables.resize(d);
  model.edge_tables = measured;
  std::vector<bool> visited(d, false);
  std::queue<AttrIndex> frontier;
  model.node_tables[0] = selection.one_way[0];
  visited[0] = true;
  frontier.push(0);
  while (!frontier.empty()) {
    const AttrIndex parent = frontier.front();
    frontier.pop();
    const auto& parent_probs = model.node_tables[parent].probs();
    for (const auto& [child, k] : adjacent[parent]) {
      if (visited[child]) continue;
      visited[child] = true;
      const Edge& e = model.edges[k];
      const std::size_t np = train.domain().cardinality(parent);
      const std::size_t nc = train.domain().cardinality(child);
      const std::size_t n_second = train.domain().cardinality(e.second);
      auto cell = [&](std::size_t pv, std::size_t cv) {
        return e.first == parent ? pv * n_second + cv : cv * n_second + pv;
      };
      const auto& raw = measured[k].probs();
      std::vector<double> joint(raw.size(), 0.0);
      std::vector<double> child_probs(nc, 0.0);
      for (std::size_t pv = 0; pv < np; ++pv) {
        double row_mass = 0.0;
        for (std::size_t cv = 0; cv < nc; ++cv) row_mass += raw[cell(pv, cv)];
        for (std::size_t cv = 0; cv < nc; ++cv) {
          const double conditional = row_mass > 0.0 ? raw[cell(pv, cv)] / row_mass
                                                    : selection.one_way[child].at(cv);
          const double p = parent_probs[pv] * conditional;
          joint[cell(pv, cv)] = p;
          child_probs[cv] += p;
        }
      }
      model.edge_tables[k] = MarginalTable(measured[k].attrs(), measured[k].shape(),
                                           std::move(joint), train.rows());
      model.node_tables[child] = MarginalTable({child}, {nc}, std::move(child_probs), train.rows());
      frontier.push(child);
    }
  }
  return model;
}

TreeModel EmpiricalTreeModel(const Dataset& ds, std::span<const Edge> edges, double floor) {
  TreeModel model;
  model.domain = ds.domain();
  model.edges.assign(edges.begin(), edges.end());
  for (std::size_t i = 0; i < ds.num_attributes(); ++i) {
    model.node_tables.push_back(Marginal(ds, {i}).Floored(floor));
  }
  for (const Edge& e : model.edges) {
    model.edge_tables.push_back(Marginal(ds, {e.first, e.second}).Floored(floor));
  }
  return model;
}

double TreeLogDensity(const TreeModel& model, std::span<const Value> record) {
  const std::size_t d = model.node_tables.size();
  std::vector<int> degree(d, 0);
  double log_density = 0.0;
  for (std::size_t k = 0; k < model.edges.size(); ++k) {
    ++degree[model.edges[k].first];
    ++degree[model.edges[k].second];
    const double p = model.edge_tables[k].Lookup(record);
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    log_density += std::log(p);
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double p = model.node_tables[i].Lookup(record);
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    log_density += (1.0 - degree[i]) * std::log(p);
  }
  return log_density;
}

double TreeDensity(const TreeModel& model, std::span<const Value> record) {
  return std::exp(TreeLogDensity(model, record));
}

Dataset SampleTree(const TreeModel& model, std::size_t n, std::uint64_t seed) {
  const Domain& domain = model.domain;
  const std::size_t d = domain.size();
  if (!IsSpanningTree(d, model.edges)) {
    throw Error(ErrorCode::kConfiguration, "tree model edges do not form a spanning tree");
  }
  // Visit order: BFS from the lowest-index node, neighbours in index order.
  struct Step {
    AttrIndex node;
    AttrIndex parent;
    std::size_t edge;
  };
  std::vector<std::vector<std::pair<AttrIndex, std::size_t>>> adjacent(d);
  for (std::size_t k = 0; k < model.edges.size(); ++k) {
    adjacent[model.edges[k].first].push_back({model.edges[k].second, k});
    adjacent[model.edges[k].second].push_back({model.edges[k].first, k});
  }
  for (auto& list : adjacent) std::sort(list.begin(), list.end());
  std::vector<Step> steps;
  std::vector<bool> visited(d, false);
  std::queue<AttrIndex> frontier;
  if (d > 0) {
    frontier.push(0);
    visited[0] = true;
  }
  while (!frontier.empty()) {
    const AttrIndex node = frontier.front();
    frontier.pop();
    for (const auto& [next, k] : adjacent[node]) {
      if (visited[next]) continue;
      visited[next] = true;
      steps.push_back({next, node, k});
      frontier.push(next);
    }
  }

  // Child-given-parent distributions, one block per parent value.
  std::vector<std::vector<double>> conditionals(steps.size());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const Step& step = steps[s];
    const Edge& e = model.edges[step.edge];
    const std::size_t np = domain.cardinality(step.parent);
    const std::size_t nc = domain.cardinality(step.node);
    const std::size_t n_second = domain.cardinality(e.second);
    const auto& table = model.edge_tables[step.edge].probs();
    auto& block = conditionals[s];
    block.resize(np * nc);
    for (std::size_t pv = 0; pv < np; ++pv) {
      double mass = 0.0;
      for (std::size_t cv = 0; cv < nc; ++cv) {
        const double p = e.first == step.parent ? table[pv * n_second + cv] : table[cv * n_second + pv];
        block[pv * nc + cv] = p;
        mass += p;
      }
      if (!(mass > 0.0)) {
        for (std::size_t cv = 0; cv < nc; ++cv) block[pv * nc + cv] = model.node_tables[step.node].at(cv);
      }
    }
  }

  Rng rng(seed);
  std::vector<Value> cells(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    Value* row = cells.data() + r * d;
    row[0] = SampleCategorical(model.node_tables[0].probs(), rng);
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const std::size_t nc = domain.cardinality(steps[s].node);
      const std::span<const double> block(conditionals[s].data() + row[steps[s].parent] * nc, nc);
      row[steps[s].node] = SampleCategorical(block, rng);
    }
  }
  return Dataset(domain, std::move(cells));
}

// ---------------------------------------------------------------------------
// PrivBayes

double PrivBayesScore(const Dataset& ds, AttrIndex child, const AttrList& parents,
                      PrivBayesScoreForm form) {
  if (std::find(parents.begin(), parents.end(), child) != parents.end()) {
    throw Error(ErrorCode::kConfiguration, "child attribute listed among its parents");
  }
  if (ds.empty()) throw Error(ErrorCode::kEstimation, "cannot score on an empty dataset");
  if (parents.empty()) return 0.0;
  AttrList family = parents;
  family.push_back(child);
  const auto counts = CountTable(ds, family);
  const std::size_t nc = ds.domain().cardinality(child);
  const std::size_t configs = counts.size() / nc;
  const double n = static_cast<double>(ds.rows());

  std::vector<double> child_probs(nc, 0.0);
  std::vector<double> parent_counts(configs, 0.0);
  for (std::size_t c = 0; c < configs; ++c) {
    for (std::size_t l = 0; l < nc; ++l) {
      const double k = static_cast<double>(counts[c * nc + l]);
      child_probs[l] += k / n;
      parent_counts[c] += k;
    }
  }
  double score = 0.0;
  for (std::size_t c = 0; c < configs; ++c) {
    const double p_parent = parent_counts[c] / n;
    for (std::size_t l = 0; l < nc; ++l) {
      const double k = static_cast<double>(counts[c * nc + l]);
      double first = 0.0;
      if (form == PrivBayesScoreForm::kJoint) {
        first = k / n;
      } else if (parent_counts[c] > 0.0) {
        first = k / parent_counts[c];
      }
      score += std::abs(first - child_probs[l] * p_parent);
    }
  }
  return 0.5 * score;
}

double PrivBayesDomainThreshold(const DpParams& dp, std::size_t rows) {
  if (dp.noiseless()) return std::numeric_limits<double>::infinity();
  return dp.theta * dp.epsilon * static_cast<double>(rows);
}

std::vector<Family> SelectPrivBayesStructure(const Dataset& train, const DpParams& dp,
                                             const PrivBayesOptions& options, Rng& rng,
                                             BudgetLedger* ledger) {
  dp.Validate();
  options.split.Validate();
  const std::size_t d = train.num_attributes();
  if (d == 0) throw Error(ErrorCode::kConfiguration, "PrivBayes needs at least one attribute");
  RequireUsableDomain(train, "PrivBayes");
  const double threshold = PrivBayesDomainThreshold(dp, train.rows());
  const double step_share = d > 1 ? options.split.selection / static_cast<double>(d - 1) : 0.0;
  const double step_epsilon = dp.noiseless() ? kInfiniteEpsilon : dp.epsilon * step_share;
  const double sensitivity = 2.0 / static_cast<double>(train.rows());

  std::vector<Family> order;
  std::vector<bool> is_placed(d, false);
  const auto first = static_cast<AttrIndex>(rng.Below(d));
  order.push_back({first, {}});
  is_placed[first] = true;

  std::vector<Family> candidates;
  std::vector<double> scores;
  for (std::size_t step = 1; step < d; ++step) {
    AttrList placed;
    for (std::size_t i = 0; i < d; ++i) {
      if (is_placed[i]) placed.push_back(i);
    }
    const std::size_t max_size = std::min(options.max_parents, placed.size());
    candidates.clear();
    for (std::size_t i = 0; i < d; ++i) {
      if (is_placed[i]) continue;
      const double child_size = static_cast<double>(train.domain().cardinality(i));
      candidates.push_back({i, {}});
      // Every subset of `placed` up to max_size, via index combinations.
      for (std::size_t size = 1; size <= max_size; ++size) {
        std::vector<std::size_t> pick(size);
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        while (true) {
          AttrList parents;
          double cells = child_size;
          for (std::size_t k : pick) {
            parents.push_back(placed[k]);
            cells *= static_cast<double>(train.domain().cardinality(placed[k]));
          }
          if (cells <= threshold) candidates.push_back({i, std::move(parents)});
          std::size_t pos = size;
          while (pos > 0 && pick[pos - 1] == placed.size() - size + pos - 1) --pos;
          if (pos == 0) break;
          ++pick[pos - 1];
          for (std::size_t k = pos; k < size; ++k) pick[k] = pick[k - 1] + 1;
        }
      }
    }
    std::sort(candidates.begin(), candidates.end());
    scores.clear();
    for (const Family& f : candidates) {
      scores.push_back(PrivBayesScore(train, f.node, f.parents, options.score_form));
    }
    const std::size_t pick = ExponentialMechanism(scores, step_epsilon, sensitivity, rng);
    order.push_back(candidates[pick]);
    is_placed[candidates[pick].node] = true;
    if (ledger) {
      ledger->Spend("select family " + std::to_string(step), step_share, 0.0, "exponential");
    }
  }
  return order;
}

BayesNetModel FitPrivBayes(const Dataset& train, const GeneratorConfig& cfg) {
  Rng rng(cfg.dp.seed);
  BayesNetModel model;
  model.domain = train.domain();
  model.ledger = BudgetLedger(cfg.dp);
  const PrivBayesOptions options{cfg.split, cfg.max_parents, cfg.score_form};
  model.order = SelectPrivBayesStructure(train, cfg.dp, options, rng, &model.ledger);
  model.domain_threshold = PrivBayesDomainThreshold(cfg.dp, train.rows());

  const std::size_t d = train.num_attributes();
  const double table_share = cfg.split.measurement / static_cast<double>(d);
  for (const Family& f : model.order) {
    AttrList attrs = f.parents;
    attrs.push_back(f.node);
    std::vector<double> counts = ToDouble(CountTable(train, attrs));
    if (!cfg.dp.noiseless()) {
      const double scale = 2.0 / (cfg.dp.epsilon * table_share);
      const auto noise = LaplaceNoise(scale, counts.size(), rng.NextU64());
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += noise[k];
    }
    model.cond_tables.push_back(ConditionalFromJoint(f.node, f.parents,
                                                     ShapeOf(train.domain(), f.parents),
                                                     train.domain().cardinality(f.node), counts,
                                                     0.0, train.rows()));
    model.ledger.Spend("measure " + FamilyKey(f), table_share, 0.0, "laplace");
  }
  return model;
}

BayesNetModel EmpiricalBayesModel(const Dataset& ds, std::span<const Family> order, double floor) {
  BayesNetModel model;
  model.domain = ds.domain();
  model.order.assign(order.begin(), order.end());
  for (const Family& f : model.order) {
    model.cond_tables.push_back(Conditional(ds, f.node, f.parents, floor));
  }
  return model;
}

double BayesLogDensity(const BayesNetModel& model, std::span<const Value> record) {
  double log_density = 0.0;
  for (const auto& table : model.cond_tables) {
    const double p = table.Lookup(record);
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    log_density += std::log(p);
  }
  return log_density;
}

double BayesDensity(const BayesNetModel& model, std::span<const Value> record) {
  return std::exp(BayesLogDensity(model, record));
}

Dataset SampleBayes(const BayesNetModel& model, std::size_t n, std::uint64_t seed) {
  const std::size_t d = model.domain.size();
  if (!IsTopologicalOrder(d, model.order)) {
    throw Error(ErrorCode::kConfiguration, "network order is not a topological order");
  }
  Rng rng(seed);
  std::vector<Value> cells(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    const std::span<Value> row(cells.data() + r * d, d);
    for (const auto& table : model.cond_tables) {
      row[table.child()] = SampleCategorical(table.Distribution(table.ParentIndex(row)), rng);
    }
  }
  return Dataset(model.domain, std::move(cells));
}

// ---------------------------------------------------------------------------

SynthModel Fit(const Dataset& train, const GeneratorConfig& cfg) {
  if (cfg.method == Method::kMst) return FitMst(train, cfg);
  return FitPrivBayes(train, cfg);
}

Dataset Sample(const SynthModel& model, std::size_t n, std::uint64_t seed) {
  if (const auto* tree = std::get_if<TreeModel>(&model)) return SampleTree(*tree, n, seed);
  return SampleBayes(std::get<BayesNetModel>(model), n, seed);
}

std::string EdgeKey(const Edge& e) {
  return std::to_string(e.first) + "-" + std::to_string(e.second);
}

std::string FamilyKey(const Family& f) {
  std::string key = std::to_string(f.node) + "|";
  for (std::size_t k = 0; k < f.parents.size(); ++k) {
    if (k) key.push_back(',');
    key += std::to_string(f.parents[k]);
  }
  return key;
}

namespace {

AttrIndex ParseIndex(std::string_view s, std::string_view key) {
  AttrIndex value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::kParse, "malformed structure key '" + std::string(key) + "'");
  }
  return value;
}

}  // namespace

Edge ParseEdgeKey(std::string_view key) {
  const auto dash = key.find('-');
  if (dash == std::string_view::npos) {
    throw Error(ErrorCode::kParse, "malformed edge key '" + std::string(key) + "'");
  }
  return MakeEdge(ParseIndex(key.substr(0, dash), key), ParseIndex(key.substr(dash + 1), key));
}

Family ParseFamilyKey(std::string_view key) {
  const auto bar = key.find('|');
  if (bar == std::string_view::npos) {
    throw Error(ErrorCode::kParse, "malformed family key '" + std::string(key) + "'");
  }
  Family f;
  f.node = ParseIndex(key.substr(0, bar), key);
  std::string_view rest = key.substr(bar + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    f.parents.push_back(ParseIndex(rest.substr(0, comma), key));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  std::sort(f.parents.begin(), f.parents.end());
  return f;
}

nlohmann::json ModelToJson(const SynthModel& model) {
  if (const auto* tree = std::get_if<TreeModel>(&model)) {
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : tree->edges) edges.push_back({e.first, e.second});
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& t : tree->node_tables) nodes.push_back(TableToJson(t));
    nlohmann::json edge_tables = nlohmann::json::array();
    for (const auto& t : tree->edge_tables) edge_tables.push_back(TableToJson(t));
    return {{"method", "MST"},
            {"domain", DomainToJson(tree->domain)},
            {"structure", {{"edges", edges}}},
            {"tables", {{"nodes", nodes}, {"edges", edge_tables}}},
            {"dp", DpParamsToJson(tree->ledger.total())},
            {"ledger", tree->ledger.ToJson()}};
  }
  const auto& bn = std::get<BayesNetModel>(model);
  nlohmann::json order = nlohmann::json::array();
  for (const Family& f : bn.order) order.push_back({{"node", f.node}, {"parents", f.parents}});
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : bn.cond_tables) tables.push_back(TableToJson(t));
  return {{"method", "PrivBayes"},
          {"domain", DomainToJson(bn.domain)},
          {"structure", {{"order", order}}},
          {"tables", tables},
          {"domain_threshold", ThresholdToJson(bn.domain_threshold)},
          {"dp", DpParamsToJson(bn.ledger.total())},
          {"ledger", bn.ledger.ToJson()}};
}

SynthModel ModelFromJson(const nlohmann::json& j) {
  const Method method = ParseMethod(j.at("method").get<std::string>());
  if (method == Method::kMst) {
    TreeModel tree;
    tree.domain = DomainFromJson(j.at("domain"));
    for (const auto& e : j.at("structure").at("edges")) {
      tree.edges.push_back(MakeEdge(e.at(0).get<AttrIndex>(), e.at(1).get<AttrIndex>()));
    }
    for (const auto& t : j.at("tables").at("nodes")) tree.node_tables.push_back(TableFromJson(t));
    for (const auto& t : j.at("tables").at("edges")) tree.edge_tables.push_back(TableFromJson(t));
    if (j.contains("ledger")) tree.ledger = BudgetLedger::FromJson(j.at("ledger"));
    if (!IsSpanningTree(tree.domain.size(), tree.edges) ||
        tree.node_tables.size() != tree.domain.size() ||
        tree.edge_tables.size() != tree.edges.size()) {
      throw Error(ErrorCode::kParse, "tree model JSON is inconsistent");
    }
    return tree;
  }
  BayesNetModel bn;
  bn.domain = DomainFromJson(j.at("domain"));
  for (const auto& f : j.at("structure").at("order")) {
    bn.order.push_back({f.at("node").get<AttrIndex>(), f.at("parents").get<AttrList>()});
  }
  for (const auto& t : j.at("tables")) bn.cond_tables.push_back(ConditionalFromJson(t));
  if (j.contains("domain_threshold")) bn.domain_threshold = ThresholdFromJson(j.at("domain_threshold"));
  if (j.contains("ledger")) bn.ledger = BudgetLedger::FromJson(j.at("ledger"));
  if (!IsTopologicalOrder(bn.domain.size(), bn.order) || bn.cond_tables.size() != bn.order.size()) {
    throw Error(ErrorCode::kParse, "network model JSON is inconsistent");
  }
  return bn;
}

}  // namespace tamis
