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

#include <numeric>

#include "tamis/error.hpp"
#include "tamis/marginals.hpp"
#include "test_util.hpp"

namespace tamis {
namespace {

Dataset Rows(std::vector<std::size_t> cards, std::vector<Value> cells) {
  return Dataset(Domain::FromCardinalities(cards), std::move(cells));
}

double Sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(Marginal, UniformCounts) {
  const MarginalTable t = Marginal(Rows({2}, {0, 0, 1, 1}), {0});
  EXPECT_EQ(t.probs(), (std::vector<double>{0.5, 0.5}));
}

TEST(Marginal, CorrelatedPair) {
  const MarginalTable t = Marginal(Rows({2, 2}, {0, 0, 1, 1}), {0, 1});
  EXPECT_EQ(t.probs(), (std::vector<double>{0.5, 0.0, 0.0, 0.5}));
}

TEST(Marginal, ThreeValues) {
  const MarginalTable t = Marginal(Rows({3}, {0, 1, 1, 2}), {0});
  EXPECT_EQ(t.probs(), (std::vector<double>{0.25, 0.5, 0.25}));
}

TEST(Marginal, EmptyDatasetIsEstimationError) {
  try {
    Marginal(Rows({2}, {}), {0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEstimation);
  }
}

TEST(Marginal, MatchesCountOracleOnRandomData) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cards = testing::RandomCardinalities(rng, 4, 1, 4);
    const Dataset ds = testing::RandomDataset(rng, cards, 50);
    const AttrList attrs = {2, 0, 3};
    const MarginalTable t = Marginal(ds, attrs);
    EXPECT_NEAR(Sum(t.probs()), 1.0, 1e-12);
    const Domain sub = Domain::FromCardinalities(std::vector<std::size_t>{cards[2], cards[0], cards[3]});
    std::size_t cell = 0;
    testing::ForEachRecord(sub, [&](std::span<const Value> v) {
      EXPECT_DOUBLE_EQ(t.at(cell++), testing::CountFraction(ds, attrs, {v[0], v[1], v[2]}));
    });
  }
}

TEST(Marginal, AxisSumConsistency) {
  Rng rng(5);
  const std::vector<std::size_t> cards = {3, 4};
  const Dataset ds = testing::RandomDataset(rng, cards, 200);
  const MarginalTable joint = Marginal(ds, {0, 1});
  const MarginalTable one = Marginal(ds, {1});
  const MarginalTable summed = joint.SumTo({1});
  for (std::size_t k = 0; k < one.cells(); ++k) EXPECT_NEAR(summed.at(k), one.at(k), 1e-15);
}

TEST(Marginal, LookupAndBounds) {
  const Dataset ds = Rows({2, 3}, {1, 2, 1, 2, 0, 0, 1, 1, 1, 2});
  const MarginalTable t = Marginal(ds, {0, 1});
  const std::vector<Value> x = {1, 2};
  EXPECT_DOUBLE_EQ(t.Lookup(x), 3.0 / 5.0);
  const std::vector<Value> bad = {1, 3};
  try {
    t.Lookup(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBounds);
  }
  const MarginalTable point = Marginal(Rows({2}, {1, 1, 1}), {0});
  const std::vector<Value> one = {1};
  EXPECT_EQ(point.Lookup(one), 1.0);
}

TEST(Marginal, FlooringKeepsNormalization) {
  const MarginalTable t = Marginal(Rows({4}, {0, 0, 0, 1}), {0}).Floored(0.01);
  EXPECT_NEAR(Sum(t.probs()), 1.0, 1e-12);
  for (double p : t.probs()) EXPECT_GE(p, 0.01 - 1e-15);
}

TEST(Conditional, RowsNormalizeAndMatchChainRule) {
  Rng rng(21);
  const std::vector<std::size_t> cards = {3, 2, 4};
  const Dataset ds = testing::RandomDataset(rng, cards, 400);
  const ConditionalTable c = Conditional(ds, 2, {0, 1}, 0.0);
  for (std::size_t cfg = 0; cfg < c.parent_configurations(); ++cfg) {
    const auto dist = c.Distribution(cfg);
    EXPECT_NEAR(std::accumulate(dist.begin(), dist.end(), 0.0), 1.0, 1e-12);
  }
  const MarginalTable joint = Marginal(ds, {0, 1, 2});
  const MarginalTable parents = Marginal(ds, {0, 1});
  testing::ForEachRecord(ds.domain(), [&](std::span<const Value> x) {
    if (parents.Lookup(x) > 0) EXPECT_NEAR(joint.Lookup(x), c.Lookup(x) * parents.Lookup(x), 1e-12);
  });
}

TEST(Conditional, UnseenParentConfigurationIsUniform) {
  const Dataset ds = Rows({3, 4}, {0, 1, 0, 2, 1, 1});
  const ConditionalTable c = Conditional(ds, 1, {0}, DefaultFloor(ds.rows()));
  for (double p : c.Distribution(2)) EXPECT_DOUBLE_EQ(p, 0.25);
  for (double p : c.probs()) EXPECT_GT(p, 0.0);
}

TEST(Conditional, EmptyParentsIsOneWay) {
  const Dataset ds = Rows({3}, {0, 1, 1, 2});
  const ConditionalTable c = Conditional(ds, 0, {}, 0.0);
  EXPECT_EQ(c.probs(), Marginal(ds, {0}).probs());
}

TEST(Conditional, IndependentChildRowsEqualMarginal) {
  // Full product of a 2-value parent and a 3-value child.
  std::vector<Value> cells;
  for (Value a = 0; a < 2; ++a) {
    for (Value b = 0; b < 3; ++b) {
      for (int rep = 0; rep < static_cast<int>(b) + 1; ++rep) {
        cells.push_back(a);
        cells.push_back(b);
      }
    }
  }
  const Dataset ds = Rows({2, 3}, cells);
  const ConditionalTable c = Conditional(ds, 1, {0}, 0.0);
  const MarginalTable m = Marginal(ds, {1});
  for (std::size_t cfg = 0; cfg < 2; ++cfg) {
    for (std::size_t v = 0; v < 3; ++v) EXPECT_NEAR(c.Distribution(cfg)[v], m.at(v), 1e-15);
  }
}

TEST(Tables, JsonRoundTrip) {
  Rng rng(2);
  const std::vector<std::size_t> cards = {2, 3};
  const Dataset ds = testing::RandomDataset(rng, cards, 30);
  const MarginalTable t = Marginal(ds, {0, 1});
  const MarginalTable back = TableFromJson(TableToJson(t));
  EXPECT_EQ(back.probs(), t.probs());
  EXPECT_EQ(back.attrs(), t.attrs());
  const ConditionalTable c = Conditional(ds, 1, {0}, 0.01);
  EXPECT_EQ(ConditionalFromJson(TableToJson(c)).probs(), c.probs());
}

TEST(CountTable, RejectsRepeatedAttribute) {
  EXPECT_THROW(CountTable(Rows({2}, {0, 1}), {0, 0}), Error);
}

}  // namespace
}  // namespace tamis
