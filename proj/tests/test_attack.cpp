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

#include "tamis/attack.hpp"
#include "tamis/error.hpp"
#include "tamis/eval.hpp"
#include "tamis/marginals.hpp"
#include "tamis/population.hpp"
#include "test_util.hpp"

namespace tamis {
namespace {

struct Instance {
  Dataset synth, aux, records;
  std::vector<Edge> tree;
  std::vector<Family> network;
};

Instance MakeInstance(Rng& rng, std::size_t d, std::size_t max_card = 4) {
  const auto cards = testing::RandomCardinalities(rng, d, 2, max_card);
  const Domain domain = Domain::FromCardinalities(cards);
  Instance in;
  const TreeModel a = RandomTreeModel(domain, 1.0, rng);
  const TreeModel b = RandomTreeModel(domain, 1.0, rng);
  in.synth = SampleTree(a, 200 + rng.Below(300), rng.NextU64());
  in.aux = SampleTree(b, 300 + rng.Below(300), rng.NextU64());
  in.records = SampleTree(a, 40, rng.NextU64());
  in.tree = RandomTreeModel(domain, 1.0, rng).edges;
  in.network = RandomBayesModel(domain, 2, 1.0, rng).order;
  return in;
}

double Ratio(const Dataset& synth, const Dataset& aux, const AttrList& attrs, std::span<const Value> x) {
  return Marginal(synth, attrs).Floored(DefaultFloor(synth.rows())).Lookup(x) /
         Marginal(aux, attrs).Floored(DefaultFloor(aux.rows())).Lookup(x);
}

TEST(Scores, IdentityWhenSynthEqualsAux) {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = MakeInstance(rng, 2 + rng.Below(4));
    const std::size_t d = in.synth.num_attributes();
    const ShadowWeights w = IndicatorWeights(d, in.tree);
    const ShadowWeights wf = IndicatorWeights(d, in.network);
    const std::vector<ScoreVector> all = {
        TamisMst(in.records, in.tree, in.synth, in.synth),
        TamisPb(in.records, in.network, in.synth, in.synth),
        MamaMiaMst(in.records, w, in.synth, in.synth),
        MamaMiaPb(in.records, wf, in.synth, in.synth),
        HybridMst(in.records, in.tree, in.synth, in.synth),
        HybridPb(in.records, in.network, in.synth, in.synth),
        TamisMstAvg(in.records, in.tree, in.synth, in.synth),
        MarginalsSigma(in.records, in.synth, in.synth)};
    for (const auto& s : all) {
      ASSERT_EQ(s.size(), in.records.rows());
      for (double l : s.log_scores) EXPECT_NEAR(l, 0.0, 1e-12) << s.attack;
    }
    const double prefactor = 1.0 / (d + d * (d - 1) / 2.0);
    for (double v : MarginalsPi(in.records, in.synth, in.synth).Values()) EXPECT_NEAR(v, prefactor, 1e-12);
  }
}

TEST(Scores, HybridEqualsMamaMiaUnderIndicatorWeights) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance in = MakeInstance(rng, 2 + rng.Below(5));
    const std::size_t d = in.synth.num_attributes();
    EXPECT_EQ(HybridMst(in.records, in.tree, in.synth, in.aux).log_scores,
              MamaMiaMst(in.records, IndicatorWeights(d, in.tree), in.synth, in.aux).log_scores);
    EXPECT_EQ(HybridPb(in.records, in.network, in.synth, in.aux).log_scores,
              MamaMiaPb(in.records, IndicatorWeights(d, in.network), in.synth, in.aux).log_scores);
  }
}

TEST(Scores, TamisEqualsDensityRatio) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = MakeInstance(rng, 2 + rng.Below(4));
    const TreeModel ms = EmpiricalTreeModel(in.synth, in.tree, DefaultFloor(in.synth.rows()));
    const TreeModel ma = EmpiricalTreeModel(in.aux, in.tree, DefaultFloor(in.aux.rows()));
    const ScoreVector tree = TamisMst(in.records, in.tree, in.synth, in.aux);
    const BayesNetModel bs = EmpiricalBayesModel(in.synth, in.network, DefaultFloor(in.synth.rows()));
    const BayesNetModel ba = EmpiricalBayesModel(in.aux, in.network, DefaultFloor(in.aux.rows()));
    const ScoreVector net = TamisPb(in.records, in.network, in.synth, in.aux);
    for (std::size_t r = 0; r < in.records.rows(); ++r) {
      const auto x = in.records.row(r);
      const double tree_ratio = TreeDensity(ms, x) / TreeDensity(ma, x);
      EXPECT_NEAR(tree.Value(r) / tree_ratio, 1.0, 1e-9);
      const double net_ratio = BayesDensity(bs, x) / BayesDensity(ba, x);
      EXPECT_NEAR(net.Value(r) / net_ratio, 1.0, 1e-9);
    }
  }
}

TEST(Scores, TwoAttributeTamisIsEdgeRatio) {
  Rng rng(4);
  const Instance in = MakeInstance(rng, 2);
  const ScoreVector s = TamisMst(in.records, in.tree, in.synth, in.aux);
  for (std::size_t r = 0; r < in.records.rows(); ++r) {
    EXPECT_NEAR(s.Value(r), Ratio(in.synth, in.aux, {0, 1}, in.records.row(r)), 1e-12);
  }
}

TEST(Scores, EmptyParentsTamisPbIsProductOfOneWayRatios) {
  Rng rng(5);
  const Instance in = MakeInstance(rng, 3);
  const std::vector<Family> flat = {{0, {}}, {1, {}}, {2, {}}};
  const ScoreVector s = TamisPb(in.records, flat, in.synth, in.aux);
  for (std::size_t r = 0; r < in.records.rows(); ++r) {
    const auto x = in.records.row(r);
    const double expected =
        Ratio(in.synth, in.aux, {0}, x) * Ratio(in.synth, in.aux, {1}, x) * Ratio(in.synth, in.aux, {2}, x);
    EXPECT_NEAR(s.Value(r), expected, 1e-12 * expected);
  }
}

TEST(Scores, MamaMiaWeightedHandSum) {
  Rng rng(6);
  const Instance in = MakeInstance(rng, 4);
  ShadowWeights w;
  w.method = Method::kMst;
  w.edge_weights[{0, 1}] = 2;
  w.edge_weights[{1, 3}] = 1;
  w.edge_weights[{2, 3}] = 1;
  const ScoreVector s = MamaMiaMst(in.records, w, in.synth, in.aux);
  for (std::size_t r = 0; r < in.records.rows(); ++r) {
    const auto x = in.records.row(r);
    const double expected = (2 * Ratio(in.synth, in.aux, {0, 1}, x) + Ratio(in.synth, in.aux, {1, 3}, x) +
                             Ratio(in.synth, in.aux, {2, 3}, x)) / 4.0;
    EXPECT_NEAR(s.Value(r), expected, 1e-12 * expected);
  }
}

TEST(Scores, MamaMiaSingleKeyIsThatRatio) {
  Rng rng(7);
  const Instance in = MakeInstance(rng, 3);
  ShadowWeights w;
  w.edge_weights[{0, 2}] = 5;
  w.edge_weights[{0, 1}] = 0;
  const ScoreVector s = MamaMiaMst(in.records, w, in.synth, in.aux);
  for (std::size_t r = 0; r < in.records.rows(); ++r) {
    const double expected = Ratio(in.synth, in.aux, {0, 2}, in.records.row(r));
    EXPECT_NEAR(s.Value(r), expected, 1e-12 * expected);
  }
  ShadowWeights wf;
  wf.method = Method::kPrivBayes;
  wf.family_weights[{2, {0}}] = 3;
  const ScoreVector f = MamaMiaPb(in.records, wf, in.synth, in.aux);
  const ConditionalTable cs = Conditional(in.synth, 2, {0}, DefaultFloor(in.synth.rows()));
  const ConditionalTable ca = Conditional(in.aux, 2, {0}, DefaultFloor(in.aux.rows()));
  for (std::size_t r = 0; r < in.records.rows(); ++r) {
    const auto x = in.records.row(r);
    EXPECT_NEAR(f.Value(r), cs.Lookup(x) / ca.Lookup(x), 1e-12 * f.Value(r));
  }
}

TEST(Scores, HybridHandAverage) {
  Rng rng(8);
  const Instance in = MakeInstance(rng, 3);
  const std::vector<Edge> tree = {{0, 1}, {1, 2}};
  const ScoreVector s = HybridMst(in.records, tree, in.synth, in.aux);
  for (std::size_t r = 0; r < in.records.rows(); ++r) {
    const auto x = in.records.row(r);
    const double expected = 0.5 * (Ratio(in.synth, in.aux, {0, 1}, x) + Ratio(in.synth, in.aux, {1, 2}, x));
    EXPECT_NEAR(s.Value(r), expected, 1e-12 * expected);
  }
}

TEST(Scores, TwoAttributeBaselinesByHand) {
  Rng rng(9);
  const Instance in = MakeInstance(rng, 2);
  const std::vector<Edge> tree = {{0, 1}};
  const ScoreVector avg = TamisMstAvg(in.records, tree, in.synth, in.aux);
  const ScoreVector sigma = MarginalsSigma(in.records, in.synth, in.aux);
  const ScoreVector pi = MarginalsPi(in.records, in.synth, in.aux);
  for (std::size_t r = 0; r < in.records.rows(); ++r) {
    const auto x = in.records.row(r);
    const double r0 = Ratio(in.synth, in.aux, {0}, x), r1 = Ratio(in.synth, in.aux, {1}, x);
    const double r01 = Ratio(in.synth, in.aux, {0, 1}, x);
    const double mean3 = (r0 + r1 + r01 / (r0 * r1)) / 3.0;
    EXPECT_NEAR(avg.Value(r), mean3, 1e-12 * mean3);
    EXPECT_NEAR(sigma.Value(r), mean3, 1e-12 * mean3);
    // Node exponent 2 - d vanishes at d = 2.
    EXPECT_NEAR(pi.Value(r), r01 / 3.0, 1e-12 * r01);
  }
}

TEST(Scores, MarginalsArePermutationInvariant) {
  Rng rng(10);
  const Instance in = MakeInstance(rng, 4);
  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  const auto permute = [&](const Dataset& ds) {
    std::vector<Attribute> attrs;
    for (std::size_t k : perm) attrs.push_back(ds.domain().attribute(k));
    std::vector<Value> cells;
    for (std::size_t r = 0; r < ds.rows(); ++r) {
      for (std::size_t k : perm) cells.push_back(ds.at(r, k));
    }
    return Dataset(Domain(attrs), cells);
  };
  const Dataset ps = permute(in.synth), pa = permute(in.aux), pr = permute(in.records);
  const ScoreVector a = MarginalsSigma(in.records, in.synth, in.aux), b = MarginalsSigma(pr, ps, pa);
  const ScoreVector c = MarginalsPi(in.records, in.synth, in.aux), e = MarginalsPi(pr, ps, pa);
  for (std::size_t r = 0; r < a.size(); ++r) {
    EXPECT_NEAR(a.log_scores[r], b.log_scores[r], 1e-12);
    EXPECT_NEAR(c.log_scores[r], e.log_scores[r], 1e-12);
  }
}

TEST(Scores, RecordPermutationPermutesOutput) {
  Rng rng(11);
  const Instance in = MakeInstance(rng, 4);
  std::vector<std::size_t> order(in.records.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
  const Dataset reversed = in.records.Select(order);
  const ScoreVector a = TamisMst(in.records, in.tree, in.synth, in.aux);
  const ScoreVector b = TamisMst(reversed, in.tree, in.synth, in.aux);
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(b.log_scores[i], a.log_scores[order[i]]);
}

TEST(Scores, StructureAndWeightErrors) {
  Rng rng(12);
  const Instance in = MakeInstance(rng, 3);
  const std::vector<Edge> not_spanning = {{0, 1}};
  EXPECT_THROW(TamisMst(in.records, not_spanning, in.synth, in.aux), Error);
  EXPECT_THROW(MamaMiaMst(in.records, ShadowWeights{}, in.synth, in.aux), Error);
  EXPECT_THROW(ScoreAttack(AttackKind::kMamaMiaMst, AttackInputs{&in.records, &in.synth, &in.aux, {}, {}, nullptr}),
               Error);
}

TEST(Attacks, NamesRoundTrip) {
  for (AttackKind k : AllAttacks()) EXPECT_EQ(ParseAttack(AttackName(k)), k);
  EXPECT_THROW(ParseAttack("nope"), Error);
}

TEST(Aggregate, MeanOfRawScores) {
  const ScoreVector s = ScoreVector::FromValues("x", std::vector<double>{0.2, 0.4, 1.5, 3.0, 0.7, 2.0});
  const std::vector<HouseholdId> hh = {5, 5, 1, 9, 1, 9};
  const ScoreVector h = AggregateHouseholds(s, hh);
  ASSERT_EQ(h.ids, (std::vector<std::int64_t>{1, 5, 9}));
  EXPECT_NEAR(h.Value(0), (1.5 + 0.7) / 2, 1e-15);
  EXPECT_NEAR(h.Value(1), 0.3, 1e-15);
  EXPECT_NEAR(h.Value(2), 2.5, 1e-15);
  const ScoreVector single = AggregateHouseholds(ScoreVector::FromValues("x", std::vector<double>{0.9}),
                                                 std::vector<HouseholdId>{4});
  EXPECT_EQ(single.Value(0), ScoreVector::FromValues("x", std::vector<double>{0.9}).Value(0));
}

TEST(ActivateSimple, Examples) {
  ScoreVector s;
  s.log_scores = {-std::numeric_limits<double>::infinity(), std::log(std::log(3.0)), 50.0};
  s.ids = {0, 1, 2};
  const Activation a = ActivateSimple(s);
  EXPECT_EQ(a.probabilities[0], 0.0);
  EXPECT_EQ(a.predictions[0], 0);
  EXPECT_NEAR(a.probabilities[1], 0.5, 1e-15);
  EXPECT_EQ(a.predictions[1], 1);
  EXPECT_EQ(a.probabilities[2], 1.0);
  EXPECT_THROW(ActivateSimple(s, 1.5), Error);
}

TEST(ActivateCalibrated, HalfPriorOnFourScores) {
  const ScoreVector s = ScoreVector::FromValues("x", std::vector<double>{1, 2, 3, 4});
  const Activation a = ActivateCalibrated(s, 0.5);
  EXPECT_EQ(a.predictions, (std::vector<std::uint8_t>{0, 0, 1, 1}));
  EXPECT_FALSE(a.degenerate);
}

TEST(ActivateCalibrated, DegenerateScores) {
  const ScoreVector s = ScoreVector::FromValues("x", std::vector<double>{2, 2, 2});
  const Activation a = ActivateCalibrated(s, 0.3);
  EXPECT_TRUE(a.degenerate);
  for (auto p : a.predictions) EXPECT_EQ(p, 0);
  EXPECT_THROW(ActivateCalibrated(s, 0.0), Error);
}

TEST(ActivateCalibrated, SmallPriorBound) {
  Rng rng(13);
  std::vector<double> v(200);
  for (double& x : v) x = 0.1 + rng.Uniform();
  const Activation a = ActivateCalibrated(ScoreVector::FromValues("x", v), 0.001);
  std::size_t positives = std::count(a.predictions.begin(), a.predictions.end(), 1);
  EXPECT_LE(positives, static_cast<std::size_t>(std::ceil(0.001 * 200)));
}

TEST(ActivateCalibrated, PositiveRateMatchesPrior) {
  Rng rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.Below(200);
    std::vector<double> v(n);
    for (double& x : v) x = std::exp(3.0 * rng.Gaussian());
    const double prior = 0.01 + 0.98 * rng.Uniform();
    const Activation a = ActivateCalibrated(ScoreVector::FromValues("x", v), prior);
    const double rate = static_cast<double>(std::count(a.predictions.begin(), a.predictions.end(), 1)) / n;
    EXPECT_LE(std::abs(rate - prior), 1.0 / n + 1e-12);
  }
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_EQ(Quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(Quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_EQ(Quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_NEAR(Quantile({0, 10}, 0.3), 3.0, 1e-15);
}

TEST(Activation, AurocInvariantUnderSimpleActivation) {
  Rng rng(15);
  std::vector<double> v(60);
  std::vector<std::uint8_t> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    v[i] = 0.05 + 2.0 * rng.Uniform();
    y[i] = rng.Below(2);
  }
  y[0] = 1;
  y[1] = 0;
  const ScoreVector s = ScoreVector::FromValues("x", v);
  EXPECT_NEAR(Auroc(s.log_scores, y), Auroc(ActivateSimple(s).probabilities, y), 1e-12);
}

TEST(ScoresCsv, Format) {
  const ScoreVector s = ScoreVector::FromValues("x", std::vector<double>{2.0, 0.5});
  const std::string csv =
      FormatScoresCsv(s, ActivateSimple(s), std::vector<HouseholdId>{3, 4}, std::vector<std::uint8_t>{1, 0});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "record_id,household_id,raw_score,probability,prediction,label");
  EXPECT_NE(csv.find("\n0,3,2,"), std::string::npos);
}

}  // namespace
}  // namespace tamis
