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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "tamis/error.hpp"
#include "tamis/marginals.hpp"
#include "tamis/population.hpp"
#include "tamis/sdg.hpp"
#include "test_util.hpp"

namespace tamis {
namespace {

Dataset Rows(std::vector<std::size_t> cards, std::vector<Value> cells) {
  return Dataset(Domain::FromCardinalities(cards), std::move(cells));
}

GeneratorConfig Config(Method method, double epsilon, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.method = method;
  cfg.dp.epsilon = epsilon;
  cfg.dp.seed = seed;
  return cfg;
}

double TotalVariation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) tv += std::abs(a[k] - b[k]);
  return 0.5 * tv;
}

TEST(MstEdgeScore, CorrelatedFairPairScoresOne) {
  const Dataset ds = Rows({2, 2}, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(MstEdgeScore(ds, 0, 1), 1.0);
}

TEST(MstEdgeScore, IndependentProductScoresZero) {
  std::vector<Value> cells;
  for (Value a = 0; a < 3; ++a) {
    for (Value b = 0; b < 2; ++b) {
      cells.push_back(a);
      cells.push_back(b);
    }
  }
  EXPECT_NEAR(MstEdgeScore(Rows({3, 2}, cells), 0, 1), 0.0, 1e-15);
}

TEST(MstEdgeScore, Symmetric) {
  Rng rng(3);
  const std::vector<std::size_t> cards = {3, 4, 2};
  const Dataset ds = testing::RandomDataset(rng, cards, 100);
  EXPECT_NEAR(MstEdgeScore(ds, 0, 2), MstEdgeScore(ds, 2, 0), 1e-15);
}

TEST(FitMst, NoiselessMatchesBruteForce) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + rng.Below(3);
    const auto cards = testing::RandomCardinalities(rng, d, 2, 4);
    const Dataset ds = testing::RandomDataset(rng, cards, 300);
    const TreeModel model = FitMst(ds, Config(Method::kMst, kInfiniteEpsilon, trial));
    const auto scores = MstScoreList(ds);
    const auto weight = [&](const std::vector<Edge>& edges) {
      double w = 0.0;
      for (const Edge& e : edges) {
        w += scores[e.first * d - e.first * (e.first + 1) / 2 + (e.second - e.first - 1)];
      }
      return w;
    };
    double best = -1.0;
    for (const auto& tree : testing::AllSpanningTrees(d)) best = std::max(best, weight(tree));
    EXPECT_NEAR(weight(model.edges), best, 1e-12);
  }
}

TEST(FitMst, TwoAttributesGiveSingleEdge) {
  Rng rng(1);
  const std::vector<std::size_t> cards = {3, 3};
  const Dataset ds = testing::RandomDataset(rng, cards, 100);
  const TreeModel model = FitMst(ds, Config(Method::kMst, 0.01, 5));
  ASSERT_EQ(model.edges.size(), 1u);
  EXPECT_EQ(model.edges[0], (Edge{0, 1}));
}

TEST(FitMst, AlwaysSpanningTreeAndWithinBudget) {
  Rng rng(2);
  const std::vector<std::size_t> cards = {2, 3, 4, 2, 3};
  const Dataset ds = testing::RandomDataset(rng, cards, 200);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const TreeModel model = FitMst(ds, Config(Method::kMst, 0.5, seed));
    ASSERT_TRUE(IsSpanningTree(5, model.edges));
    EXPECT_LE(model.ledger.epsilon_spent(), 1.0 + 1e-9);
    EXPECT_LE(model.ledger.delta_spent(), 1.0 + 1e-9);
  }
}

TEST(FitMst, TablesAreConsistent) {
  Rng rng(4);
  const std::vector<std::size_t> cards = {3, 2, 4, 3};
  const Dataset ds = testing::RandomDataset(rng, cards, 500);
  const TreeModel model = FitMst(ds, Config(Method::kMst, 1.0, 7));
  for (std::size_t k = 0; k < model.edges.size(); ++k) {
    const Edge& e = model.edges[k];
    const auto a = model.edge_tables[k].SumTo({e.first});
    const auto b = model.edge_tables[k].SumTo({e.second});
    for (std::size_t v = 0; v < a.cells(); ++v) EXPECT_NEAR(a.at(v), model.node_tables[e.first].at(v), 1e-6);
    for (std::size_t v = 0; v < b.cells(); ++v) EXPECT_NEAR(b.at(v), model.node_tables[e.second].at(v), 1e-6);
  }
}

TEST(FitMst, DegenerateDomainIsConfigurationError) {
  const Dataset ds = ParseCsv("a,b\n");
  try {
    FitMst(ds, Config(Method::kMst, 1.0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfiguration);
  }
}

TEST(TreeDensity, TwoNodesIsEdgeTable) {
  Rng rng(5);
  const std::vector<std::size_t> cards = {3, 2};
  const Dataset ds = testing::RandomDataset(rng, cards, 60);
  const std::vector<Edge> edges = {{0, 1}};
  const TreeModel model = EmpiricalTreeModel(ds, edges, 0.0);
  testing::ForEachRecord(ds.domain(), [&](std::span<const Value> x) {
    EXPECT_NEAR(TreeDensity(model, x), model.edge_tables[0].Lookup(x), 1e-15);
  });
}

TEST(TreeDensity, PathFormula) {
  Rng rng(6);
  const std::vector<std::size_t> cards = {2, 3, 2};
  const Dataset ds = testing::RandomDataset(rng, cards, 200);
  const std::vector<Edge> edges = {{0, 1}, {1, 2}};
  const TreeModel model = EmpiricalTreeModel(ds, edges, 0.001);
  testing::ForEachRecord(ds.domain(), [&](std::span<const Value> x) {
    const double expected = model.edge_tables[0].Lookup(x) * model.edge_tables[1].Lookup(x) /
                            model.node_tables[1].Lookup(x);
    EXPECT_NEAR(TreeDensity(model, x), expected, 1e-13);
  });
}

TEST(TreeDensity, NormalizesOnRandomModels) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cards = testing::RandomCardinalities(rng, 4, 1, 5);
    const TreeModel model = RandomTreeModel(Domain::FromCardinalities(cards), 1.0, rng);
    double total = 0.0;
    testing::ForEachRecord(model.domain, [&](std::span<const Value> x) { total += TreeDensity(model, x); });
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(SampleTree, PointMassAndDeterminism) {
  const Dataset ds = Rows({2, 3}, {1, 2, 1, 2});
  const std::vector<Edge> edges = {{0, 1}};
  const TreeModel model = EmpiricalTreeModel(ds, edges, 0.0);
  const Dataset s = SampleTree(model, 100, 3);
  for (std::size_t r = 0; r < s.rows(); ++r) {
    EXPECT_EQ(s.at(r, 0), 1u);
    EXPECT_EQ(s.at(r, 1), 2u);
  }
  const Dataset a = SampleTree(model, 10, 9), b = SampleTree(model, 10, 9);
  EXPECT_TRUE(std::equal(a.cells().begin(), a.cells().end(), b.cells().begin()));
}

TEST(SampleTree, EmpiricalTablesConverge) {
  Rng rng(8);
  const std::vector<std::size_t> cards = {3, 4, 2, 3};
  const TreeModel model = RandomTreeModel(Domain::FromCardinalities(cards), 1.0, rng);
  const Dataset s = SampleTree(model, 1'000'000, 77);
  for (std::size_t k = 0; k < model.edges.size(); ++k) {
    const Edge& e = model.edges[k];
    EXPECT_LT(TotalVariation(Marginal(s, {e.first, e.second}).probs(), model.edge_tables[k].probs()), 0.01);
  }
}

TEST(PrivBayesScore, Examples) {
  const Dataset pair = Rows({2, 2}, {0, 0, 1, 1});
  EXPECT_EQ(PrivBayesScore(pair, 0, {}), 0.0);
  EXPECT_DOUBLE_EQ(PrivBayesScore(pair, 1, {0}), 0.5);
  std::vector<Value> cells;
  for (Value a = 0; a < 2; ++a) {
    for (Value b = 0; b < 3; ++b) {
      cells.push_back(a);
      cells.push_back(b);
    }
  }
  EXPECT_NEAR(PrivBayesScore(Rows({2, 3}, cells), 1, {0}), 0.0, 1e-15);
}

TEST(FitPrivBayes, SingleAttribute) {
  const Dataset ds = Rows({3}, {0, 1, 2, 2});
  const BayesNetModel model = FitPrivBayes(ds, Config(Method::kPrivBayes, 1.0, 1));
  ASSERT_EQ(model.order.size(), 1u);
  EXPECT_TRUE(model.order[0].parents.empty());
  EXPECT_EQ(model.cond_tables[0].probs().size(), 3u);
}

TEST(FitPrivBayes, AcyclicAndThresholdRespected) {
  Rng rng(10);
  const std::vector<std::size_t> cards = {2, 3, 2, 4, 2};
  const Dataset ds = testing::RandomDataset(rng, cards, 2000);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    GeneratorConfig cfg = Config(Method::kPrivBayes, 10.0, seed);
    const BayesNetModel model = FitPrivBayes(ds, cfg);
    ASSERT_TRUE(IsTopologicalOrder(5, model.order));
    EXPECT_DOUBLE_EQ(model.domain_threshold, PrivBayesDomainThreshold(cfg.dp, ds.rows()));
    for (const Family& f : model.order) {
      EXPECT_LE(f.parents.size(), cfg.max_parents);
      if (f.parents.empty()) continue;
      std::size_t size = cards[f.node];
      for (AttrIndex p : f.parents) size *= cards[p];
      EXPECT_LE(static_cast<double>(size), model.domain_threshold);
    }
    EXPECT_LE(model.ledger.epsilon_spent(), 1.0 + 1e-9);
  }
}

TEST(FitPrivBayes, NoiselessChainRecovery) {
  // Strong chain 0 -> 1 -> 2 -> 3: each node copies its predecessor w.p. 0.9.
  const std::size_t d = 4;
  Rng rng(11);
  std::vector<Value> cells;
  for (int r = 0; r < 100000; ++r) {
    Value v = static_cast<Value>(rng.Below(3));
    for (std::size_t i = 0; i < d; ++i) {
      if (i > 0 && rng.Uniform() >= 0.9) v = static_cast<Value>(rng.Below(3));
      cells.push_back(v);
    }
  }
  const Dataset ds = Rows({3, 3, 3, 3}, cells);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GeneratorConfig cfg = Config(Method::kPrivBayes, kInfiniteEpsilon, seed);
    cfg.max_parents = 1;
    const BayesNetModel model = FitPrivBayes(ds, cfg);
    for (const Family& f : model.order) {
      for (AttrIndex p : f.parents) {
        EXPECT_EQ(std::max(p, f.node) - std::min(p, f.node), 1u) << FamilyKey(f);
      }
    }
  }
}

TEST(BayesDensity, EmptyParentsIsProduct) {
  Rng rng(12);
  const std::vector<std::size_t> cards = {2, 3, 2};
  const Dataset ds = testing::RandomDataset(rng, cards, 100);
  const std::vector<Family> order = {{0, {}}, {1, {}}, {2, {}}};
  const BayesNetModel model = EmpiricalBayesModel(ds, order, 0.0);
  std::vector<MarginalTable> one = {Marginal(ds, {0}), Marginal(ds, {1}), Marginal(ds, {2})};
  testing::ForEachRecord(ds.domain(), [&](std::span<const Value> x) {
    EXPECT_NEAR(BayesDensity(model, x), one[0].Lookup(x) * one[1].Lookup(x) * one[2].Lookup(x), 1e-15);
  });
}

TEST(BayesDensity, ChainRule) {
  Rng rng(13);
  const std::vector<std::size_t> cards = {2, 3, 2};
  const Dataset ds = testing::RandomDataset(rng, cards, 300);
  const std::vector<Family> order = {{0, {}}, {1, {0}}, {2, {1}}};
  const BayesNetModel model = EmpiricalBayesModel(ds, order, 0.01);
  const ConditionalTable p0 = Conditional(ds, 0, {}, 0.01);
  const ConditionalTable p1 = Conditional(ds, 1, {0}, 0.01);
  const ConditionalTable p2 = Conditional(ds, 2, {1}, 0.01);
  double total = 0.0;
  testing::ForEachRecord(ds.domain(), [&](std::span<const Value> x) {
    const double d = BayesDensity(model, x);
    EXPECT_NEAR(d, p0.Lookup(x) * p1.Lookup(x) * p2.Lookup(x), 1e-15);
    total += d;
  });
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(SampleBayes, EmpiricalTablesConverge) {
  Rng rng(14);
  const std::vector<std::size_t> cards = {3, 2, 3};
  const BayesNetModel model = RandomBayesModel(Domain::FromCardinalities(cards), 2, 1.0, rng);
  const Dataset s = SampleBayes(model, 1'000'000, 5);
  const MarginalTable empirical = Marginal(s, {0, 1, 2});
  std::vector<double> exact;
  testing::ForEachRecord(model.domain, [&](std::span<const Value> x) { exact.push_back(BayesDensity(model, x)); });
  EXPECT_LT(TotalVariation(empirical.probs(), exact), 0.01);
}

TEST(Models, JsonRoundTrip) {
  Rng rng(15);
  const std::vector<std::size_t> cards = {2, 3, 4};
  const Dataset ds = testing::RandomDataset(rng, cards, 500);
  for (Method method : {Method::kMst, Method::kPrivBayes}) {
    const SynthModel model = Fit(ds, Config(method, 2.0, 4));
    const SynthModel back = ModelFromJson(ModelToJson(model));
    EXPECT_EQ(ModelToJson(back).dump(), ModelToJson(model).dump());
    const Dataset a = Sample(model, 50, 8), b = Sample(back, 50, 8);
    EXPECT_TRUE(std::equal(a.cells().begin(), a.cells().end(), b.cells().begin()));
  }
}

TEST(Keys, RoundTrip) {
  EXPECT_EQ(EdgeKey({1, 4}), "1-4");
  EXPECT_EQ(ParseEdgeKey("1-4"), (Edge{1, 4}));
  const Family f{3, {0, 2}};
  EXPECT_EQ(FamilyKey(f), "3|0,2");
  EXPECT_EQ(ParseFamilyKey("3|0,2"), f);
  EXPECT_EQ(ParseFamilyKey("5|"), (Family{5, {}}));
  EXPECT_THROW(ParseEdgeKey("x"), Error);
}

}  // namespace
}  // namespace tamis
