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

#ifndef TAMIS_HARNESS_HPP_
#define TAMIS_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tamis/attack.hpp"
#include "tamis/data.hpp"
#include "tamis/population.hpp"
#include "tamis/recovery.hpp"
#include "tamis/sdg.hpp"

namespace tamis {

enum class Setting { kAuxIndividuals, kTargetIndividuals, kTargetHouseholds };

std::string_view SettingName(Setting s);
Setting ParseSetting(std::string_view name);

// An attack as configured in an experiment. A trailing '*' in the name feeds
// the attack the structure the generator truly selected.
struct AttackSpec {
  AttackKind kind = AttackKind::kTamisMst;
  bool true_structure = false;

  std::string Name() const;
  static AttackSpec Parse(std::string_view name);
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t replicas = 1;
  std::vector<double> epsilons = {0.1, 1.0, 10.0, 100.0, 1000.0};
  std::vector<Method> methods = {Method::kMst, Method::kPrivBayes};
  std::vector<AttackSpec> attacks;
  // Run every attack against every method, not only the one it targets.
  bool cross_targeted = false;
  std::vector<Setting> settings = {Setting::kAuxIndividuals, Setting::kTargetIndividuals,
                                   Setting::kTargetHouseholds};

  // Generator parameters shared by all runs (epsilon and seed vary).
  std::size_t n_synth = 10'000;
  double delta = 1e-9;
  double theta = 4e-4;
  BudgetSplit split_budget;
  std::size_t max_parents = 3;
  PrivBayesScoreForm score_form = PrivBayesScoreForm::kJoint;

  SplitSpec split;
  std::size_t shadow_runs = 50;

  double threshold = 0.5;
  double household_prior = 0.5;
  // Empirical member fraction when unset.
  std::optional<double> individual_prior;

  // Auxiliary data: a CSV file, or a simulated population.
  std::optional<std::filesystem::path> aux_path;
  PopulationSpec population;

  std::filesystem::path output_dir = "results";
  std::size_t threads = 1;

  void Validate() const;
};

ExperimentConfig DefaultExperimentConfig();
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg);
// Missing keys keep their defaults.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);

// Hash of every field that affects results (not output_dir or threads).
std::string ConfigHash(const ExperimentConfig& cfg);

struct MetricRow {
  std::string attack;
  std::string method;
  std::string setting;
  double epsilon = 0.0;
  std::size_t replica = 0;
  std::string metric;
  double value = 0.0;
};

// State shared read-only by all replicas.
struct ExperimentContext {
  Dataset aux;
  // Keyed by (method the attacker assumes, epsilon).
  std::map<std::pair<Method, double>, ShadowWeights> shadow;
};

// Loads or simulates aux and computes every shadow weight table the
// configured attacks need.
ExperimentContext PrepareExperiment(const ExperimentConfig& cfg);

// Fully deterministic given (cfg.seed, replica).
std::vector<MetricRow> RunReplica(const ExperimentConfig& cfg, const ExperimentContext& ctx,
                                  std::size_t replica);

std::string FormatMetricsCsv(const std::vector<MetricRow>& rows);
std::vector<MetricRow> ParseMetricsCsv(std::string_view text);

// Mean, population std and median per (attack, method, setting, epsilon, metric).
nlohmann::json SummarizeMetrics(const std::vector<MetricRow>& rows);

struct ExperimentReport {
  std::vector<MetricRow> rows;
  nlohmann::json summary;
  std::size_t replicas_run = 0;
  std::size_t replicas_resumed = 0;
};

// Writes config.json, replicas/replica_NNNN.csv (+ .done markers),
// metrics.csv and summary.json under cfg.output_dir. Replicas with a valid
// marker are reused; a config hash mismatch is refused.
ExperimentReport RunExperiment(const ExperimentConfig& cfg);

std::string FormatEpsilon(double epsilon);

}  // namespace tamis

#endif  // TAMIS_HARNESS_HPP_
