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

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "tamis/error.hpp"
#include "tamis/harness.hpp"

namespace tamis {
namespace {

namespace fs = std::filesystem;

ExperimentConfig SmallConfig(const fs::path& out) {
  ExperimentConfig cfg = DefaultExperimentConfig();
  cfg.seed = 17;
  cfg.replicas = 2;
  cfg.epsilons = {1.0, std::numeric_limits<double>::infinity()};
  cfg.n_synth = 800;
  cfg.shadow_runs = 3;
  cfg.population.rows = 2500;
  cfg.population.attributes = 5;
  cfg.population.max_cardinality = 4;
  cfg.split.n_target_households = 16;
  cfg.split.min_household_size = 3;
  cfg.split.train_size = 800;
  cfg.output_dir = out;
  return cfg;
}

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tamis_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg = SmallConfig("somewhere");
  cfg.cross_targeted = true;
  cfg.individual_prior = 0.25;
  cfg.score_form = PrivBayesScoreForm::kConditional;
  cfg.attacks.push_back(AttackSpec::Parse("Marginals-Pi"));
  const nlohmann::json j = ExperimentConfigToJson(cfg);
  const ExperimentConfig back = ExperimentConfigFromJson(j);
  EXPECT_EQ(ExperimentConfigToJson(back), j);
  EXPECT_EQ(ConfigHash(back), ConfigHash(cfg));
  EXPECT_EQ(j["epsilons"][1], "inf");
}

TEST(Config, HashIgnoresOutputAndThreads) {
  ExperimentConfig a = SmallConfig("x"), b = SmallConfig("y");
  b.threads = 4;
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  b.seed = 18;
  EXPECT_NE(ConfigHash(a), ConfigHash(b));
}

TEST(Config, Rejections) {
  EXPECT_THROW(ExperimentConfigFromJson(nlohmann::json::parse(R"({"epsilons": ["big"]})")), Error);
  EXPECT_THROW(ExperimentConfigFromJson(nlohmann::json::parse(R"({"attacks": ["nope"]})")), Error);
  EXPECT_THROW(AttackSpec::Parse("Marginals-Sigma*"), Error);
  EXPECT_THROW(AttackSpec::Parse("MAMAMIA-MST*"), Error);
  ExperimentConfig bad = SmallConfig("x");
  bad.epsilons = {-1.0};
  EXPECT_THROW(bad.Validate(), Error);
}

TEST(MetricsCsv, RoundTrip) {
  const std::vector<MetricRow> rows = {
      {"TAMIS-MST", "MST", "target-households", 0.1, 3, "auroc", 0.6123456789012345},
      {"recover_tree", "MST", "structure", std::numeric_limits<double>::infinity(), 0, "jaccard", 1.0}};
  const std::string csv = FormatMetricsCsv(rows);
  EXPECT_NE(csv.find(",0.1,"), std::string::npos);
  EXPECT_NE(csv.find(",inf,"), std::string::npos);
  EXPECT_EQ(FormatMetricsCsv(ParseMetricsCsv(csv)), csv);
}

TEST(Experiment, DeterministicAndThreadInvariant) {
  ExperimentConfig a = SmallConfig(TempDir("det_a"));
  ExperimentConfig b = SmallConfig(TempDir("det_b"));
  b.threads = 2;
  RunExperiment(a);
  RunExperiment(b);
  const std::string ma = Slurp(a.output_dir / "metrics.csv");
  ASSERT_FALSE(ma.empty());
  EXPECT_EQ(ma, Slurp(b.output_dir / "metrics.csv"));
  EXPECT_EQ(Slurp(a.output_dir / "summary.json"), Slurp(b.output_dir / "summary.json"));
}

TEST(Experiment, ResumeAndRefuse) {
  ExperimentConfig cfg = SmallConfig(TempDir("resume"));
  const ExperimentReport first = RunExperiment(cfg);
  EXPECT_EQ(first.replicas_run, 2u);
  const std::string metrics = Slurp(cfg.output_dir / "metrics.csv");

  fs::remove(cfg.output_dir / "replicas" / "replica_0001.done");
  const ExperimentReport second = RunExperiment(cfg);
  EXPECT_EQ(second.replicas_resumed, 1u);
  EXPECT_EQ(second.replicas_run, 1u);
  EXPECT_EQ(Slurp(cfg.output_dir / "metrics.csv"), metrics);

  ExperimentConfig changed = cfg;
  changed.seed += 1;
  try {
    RunExperiment(changed);
    FAIL() << "mismatched config accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfiguration);
  }
}

TEST(Experiment, InfiniteEpsilonRecoversTreeExactly) {
  ExperimentConfig cfg = SmallConfig("unused");
  cfg.replicas = 1;
  cfg.methods = {Method::kMst};
  cfg.epsilons = {std::numeric_limits<double>::infinity()};
  cfg.attacks = {AttackSpec::Parse("TAMIS-MST")};
  // Enough synthetic rows that sampling noise cannot swap near-tied edges.
  cfg.n_synth = 20'000;
  const ExperimentContext ctx = PrepareExperiment(cfg);
  bool seen = false;
  for (const MetricRow& r : RunReplica(cfg, ctx, 0)) {
    if (r.attack == "recover_tree" && r.metric == "perfect_match") {
      EXPECT_EQ(r.value, 1.0);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Experiment, CrossTargetedRunsEveryPair) {
  ExperimentConfig cfg = SmallConfig("unused");
  cfg.replicas = 1;
  cfg.epsilons = {10.0};
  cfg.cross_targeted = true;
  cfg.attacks = {AttackSpec::Parse("TAMIS-MST"), AttackSpec::Parse("TAMIS-PB"),
                 AttackSpec::Parse("MAMAMIA-PB"), AttackSpec::Parse("TAMIS-PB*")};
  cfg.settings = {Setting::kTargetHouseholds};
  const ExperimentContext ctx = PrepareExperiment(cfg);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const MetricRow& r : RunReplica(cfg, ctx, 0)) {
    if (r.setting == "target-households") pairs.insert({r.attack, r.method});
  }
  EXPECT_TRUE(pairs.count({"TAMIS-MST", "PrivBayes"}));
  EXPECT_TRUE(pairs.count({"TAMIS-PB", "MST"}));
  EXPECT_TRUE(pairs.count({"MAMAMIA-PB", "MST"}));
  EXPECT_TRUE(pairs.count({"TAMIS-PB*", "PrivBayes"}));
  // The true network does not exist when attacking an MST release.
  EXPECT_FALSE(pairs.count({"TAMIS-PB*", "MST"}));
}

TEST(Experiment, MetricsAreInRange) {
  ExperimentConfig cfg = SmallConfig("unused");
  cfg.replicas = 1;
  const ExperimentContext ctx = PrepareExperiment(cfg);
  for (const MetricRow& r : RunReplica(cfg, ctx, 0)) {
    EXPECT_GE(r.value, 0.0) << r.attack << " " << r.metric;
    EXPECT_LE(r.value, 1.0) << r.attack << " " << r.metric;
  }
}

}  // namespace
}  // namespace tamis
