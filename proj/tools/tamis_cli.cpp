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

// Command-line front end: generate, recover, shadow, attack, evaluate,
// replicate and simulate.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tamis/attack.hpp"
#include "tamis/data.hpp"
#include "tamis/error.hpp"
#include "tamis/eval.hpp"
#include "tamis/harness.hpp"
#include "tamis/population.hpp"
#include "tamis/recovery.hpp"
#include "tamis/sdg.hpp"

namespace {

using nlohmann::json;
using tamis::Error;
using tamis::ErrorCode;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ReadJson(const std::string& path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

// Writes to `path`, or stdout when it is empty or "-".
void Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
}

double ParseEpsilonFlag(const std::string& s) {
  if (s == "inf" || s == "infinity") return tamis::kInfiniteEpsilon;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !(v > 0.0)) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kParameter, "epsilon must be a positive number or 'inf', got '" + s + "'");
  }
}

// Loads CSV files under one shared encoding: the --domain file if given,
// otherwise the union of categories seen across the files.
std::vector<tamis::Dataset> LoadShared(const std::vector<std::string>& paths,
                                       const std::string& domain_path) {
  std::optional<tamis::Domain> domain;
  if (!domain_path.empty()) {
    domain = tamis::DomainFromJson(ReadJson(domain_path));
  } else {
    std::vector<tamis::Dataset> raw;
    for (const auto& p : paths) raw.push_back(tamis::LoadCsv(p));
    domain = tamis::MergeDomains(raw);
  }
  std::vector<tamis::Dataset> out;
  for (const auto& p : paths) out.push_back(tamis::LoadCsv(p, domain));
  return out;
}

// Generator settings read from an optional --config JSON file.
tamis::GeneratorConfig GeneratorFromConfig(const std::string& path) {
  tamis::GeneratorConfig g;
  if (path.empty()) return g;
  const json j = ReadJson(path);
  try {
    g.dp = tamis::DpParamsFromJson(j);
    g.n_synth = j.value("n_synth", g.n_synth);
    g.max_parents = j.value("max_parents", g.max_parents);
    if (j.contains("method")) g.method = tamis::ParseMethod(j.at("method").get<std::string>());
    if (j.contains("budget_split")) {
      g.split.selection = j["budget_split"].value("selection", g.split.selection);
      g.split.measurement = j["budget_split"].value("measurement", g.split.measurement);
    }
    if (j.value("score_form", std::string("joint")) == "conditional") {
      g.score_form = tamis::PrivBayesScoreForm::kConditional;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfiguration, path + ": " + e.what());
  }
  return g;
}

json StructureToJson(tamis::Method method, const tamis::KeySet& keys) {
  return {{"method", tamis::MethodName(method)}, {"structure", std::vector<std::string>(keys.begin(), keys.end())}};
}

struct Structure {
  tamis::Method method = tamis::Method::kMst;
  std::vector<tamis::Edge> edges;
  std::vector<tamis::Family> families;
};

// Accepts a structure file, a model file or a shadow-weights file.
Structure StructureFromJson(const json& j) {
  Structure s;
  s.method = tamis::ParseMethod(j.at("method").get<std::string>());
  if (j.contains("structure") && j.at("structure").is_array()) {
    for (const auto& k : j.at("structure")) {
      if (s.method == tamis::Method::kMst) {
        s.edges.push_back(tamis::ParseEdgeKey(k.get<std::string>()));
      } else {
        s.families.push_back(tamis::ParseFamilyKey(k.get<std::string>()));
      }
    }
    return s;
  }
  const tamis::SynthModel model = tamis::ModelFromJson(j);
  if (const auto* t = std::get_if<tamis::TreeModel>(&model)) s.edges = t->edges;
  if (const auto* b = std::get_if<tamis::BayesNetModel>(&model)) s.families = b->order;
  return s;
}

tamis::KeySet KeysOf(const json& j) {
  if (j.contains("weights")) return tamis::StructureKeys(tamis::ShadowWeightsFromJson(j));
  const Structure s = StructureFromJson(j);
  return s.method == tamis::Method::kMst ? tamis::StructureKeys(s.edges) : tamis::StructureKeys(s.families);
}

// Parents must appear before children when scoring with a network.
std::vector<tamis::Family> TopologicalFamilies(std::vector<tamis::Family> families) {
  std::vector<tamis::Family> out;
  std::vector<bool> placed;
  for (const auto& f : families) placed.resize(std::max(placed.size(), f.node + 1), false);
  while (!families.empty()) {
    bool progress = false;
    for (auto it = families.begin(); it != families.end();) {
      const bool ready = std::all_of(it->parents.begin(), it->parents.end(),
                                     [&](std::size_t p) { return p < placed.size() && placed[p]; });
      if (ready) {
        placed[it->node] = true;
        out.push_back(*it);
        it = families.erase(it);
        progress = true;
      } else {
        ++it;
      }
    }
    if (!progress) throw Error(ErrorCode::kConfiguration, "network structure is cyclic or incomplete");
  }
  return out;
}

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string epsilon;
  std::string method;
  std::string attack;
  std::string out;

  std::string train, synth, aux, records, domain, structure, weights, scores, truth, estimate;
  std::size_t n_synth = 0;
  std::size_t runs = 50;
  std::size_t subset_size = 0;
  std::size_t threads = 0;
  std::string activation = "simple";
  double threshold = 0.5;
  double prior = -1.0;
  bool households = false;
  std::size_t rows = 0;
};

void AddCommon(CLI::App* cmd, Options& o, bool needs_epsilon) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--seed", o.seed, "Random seed")->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--out", o.out, "Output path (file or directory)");
  if (needs_epsilon) cmd->add_option("--epsilon", o.epsilon, "Privacy budget (number or 'inf')");
}

int RunGenerate(const Options& o) {
  tamis::GeneratorConfig g = GeneratorFromConfig(o.config);
  if (!o.method.empty()) g.method = tamis::ParseMethod(o.method);
  if (!o.epsilon.empty()) g.dp.epsilon = ParseEpsilonFlag(o.epsilon);
  if (o.seed_set) g.dp.seed = o.seed;
  if (o.n_synth) g.n_synth = o.n_synth;
  const auto data = LoadShared({o.train}, o.domain);
  const tamis::SynthModel model = tamis::Fit(data[0], g);
  const tamis::Dataset synth = tamis::Sample(model, g.n_synth, tamis::DeriveSeed(g.dp.seed, 1));
  const std::filesystem::path dir = o.out.empty() ? "." : o.out;
  std::filesystem::create_directories(dir);
  tamis::WriteCsv(synth, dir / "synth.csv");
  Emit((dir / "model.json").string(), tamis::ModelToJson(model).dump(2) + "\n");
  Emit((dir / "domain.json").string(), tamis::DomainToJson(synth.domain()).dump(2) + "\n");
  return 0;
}

int RunRecover(const Options& o) {
  tamis::GeneratorConfig g = GeneratorFromConfig(o.config);
  if (!o.method.empty()) g.method = tamis::ParseMethod(o.method);
  if (!o.epsilon.empty()) g.dp.epsilon = ParseEpsilonFlag(o.epsilon);
  if (o.seed_set) g.dp.seed = o.seed;
  const auto data = LoadShared({o.synth}, o.domain);
  json out;
  if (g.method == tamis::Method::kMst) {
    tamis::RecoveryCost cost;
    out = StructureToJson(g.method, tamis::StructureKeys(tamis::RecoverTree(data[0], &cost)));
  } else {
    out = StructureToJson(g.method, tamis::StructureKeys(tamis::RecoverBayesNet(
                                        data[0], g.dp, {g.split, g.max_parents, g.score_form})));
  }
  Emit(o.out, out.dump(2) + "\n");
  return 0;
}

int RunShadow(const Options& o) {
  tamis::GeneratorConfig g = GeneratorFromConfig(o.config);
  if (!o.method.empty()) g.method = tamis::ParseMethod(o.method);
  if (!o.epsilon.empty()) g.dp.epsilon = ParseEpsilonFlag(o.epsilon);
  const auto data = LoadShared({o.aux}, o.domain);
  tamis::ShadowConfig sc;
  sc.runs = o.runs;
  sc.subset_size = o.subset_size ? o.subset_size : std::min<std::size_t>(10'000, data[0].rows());
  sc.dp = g.dp;
  sc.split = g.split;
  sc.max_parents = g.max_parents;
  sc.score_form = g.score_form;
  sc.seed = o.seed;
  sc.threads = o.threads ? o.threads : 1;
  Emit(o.out, tamis::ShadowWeightsToJson(tamis::ComputeShadowWeights(data[0], g.method, sc)).dump(2) + "\n");
  return 0;
}

int RunAttack(const Options& o) {
  if (o.attack.empty()) throw Error(ErrorCode::kConfiguration, "--attack is required");
  const tamis::AttackKind kind = tamis::ParseAttack(o.attack);
  const auto data = LoadShared({o.records, o.synth, o.aux}, o.domain);
  tamis::AttackInputs in;
  in.records = &data[0];
  in.synth = &data[1];
  in.aux = &data[2];
  std::optional<tamis::ShadowWeights> weights;
  if (!o.weights.empty()) {
    weights = tamis::ShadowWeightsFromJson(ReadJson(o.weights));
    in.weights = &*weights;
  }
  const bool mst = tamis::AttackTarget(kind) == tamis::Method::kMst;
  if (!o.structure.empty()) {
    const Structure s = StructureFromJson(ReadJson(o.structure));
    in.tree = s.edges;
    in.network = TopologicalFamilies(s.families);
  } else if (mst) {
    in.tree = tamis::RecoverTree(data[1]);
  } else {
    tamis::GeneratorConfig g = GeneratorFromConfig(o.config);
    if (!o.epsilon.empty()) g.dp.epsilon = ParseEpsilonFlag(o.epsilon);
    if (o.seed_set) g.dp.seed = o.seed;
    in.network = tamis::RecoverBayesNet(data[1], g.dp, {g.split, g.max_parents, g.score_form});
  }
  tamis::ScoreVector scores = tamis::ScoreAttack(kind, in);

  std::vector<tamis::HouseholdId> households;
  std::vector<std::uint8_t> labels;
  if (data[0].households()) households = *data[0].households();
  if (data[0].membership()) labels = *data[0].membership();
  if (o.households) {
    if (households.empty()) throw Error(ErrorCode::kConfiguration, "--households needs a __household__ column");
    std::map<tamis::HouseholdId, std::uint8_t> household_label;
    for (std::size_t r = 0; r < households.size(); ++r) {
      if (!labels.empty()) household_label[households[r]] |= labels[r];
    }
    scores = tamis::AggregateHouseholds(scores, households);
    households.assign(scores.ids.begin(), scores.ids.end());
    if (!labels.empty()) {
      labels.clear();
      for (auto id : scores.ids) labels.push_back(household_label[id]);
    }
  }
  tamis::ActivationConfig act;
  act.threshold = o.threshold;
  if (o.activation == "calibrated") {
    act.regime = tamis::ActivationRegime::kCalibrated;
    if (o.prior >= 0.0) {
      act.prior = o.prior;
    } else if (!labels.empty()) {
      act.prior = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) / labels.size();
    } else {
      throw Error(ErrorCode::kParameter, "calibrated activation needs --prior or known labels");
    }
  } else if (o.activation != "simple") {
    throw Error(ErrorCode::kConfiguration, "--activation must be 'simple' or 'calibrated'");
  }
  Emit(o.out, tamis::FormatScoresCsv(scores, tamis::Activate(scores, act), households, labels));
  return 0;
}

int RunEvaluate(const Options& o) {
  json out = json::object();
  if (!o.scores.empty()) {
    std::istringstream in(ReadFile(o.scores));
    std::string line;
    std::getline(in, line);
    std::vector<double> raw;
    std::vector<std::uint8_t> labels;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string field; std::getline(ls, field, ',');) f.push_back(field);
      if (f.size() < 6 || f[5].empty()) throw Error(ErrorCode::kParse, "scores CSV rows need a label: " + line);
      try {
        raw.push_back(std::stod(f[2]));
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::kParse, "bad raw_score in scores CSV: " + line);
      }
      labels.push_back(f[5] == "1" ? 1 : 0);
    }
    std::vector<double> logs;
    for (double v : raw) logs.push_back(std::log(v));
    tamis::ScoreVector scores;
    scores.log_scores = logs;
    for (std::size_t i = 0; i < logs.size(); ++i) scores.ids.push_back(static_cast<std::int64_t>(i));
    const tamis::MetricBundle m = tamis::Evaluate(scores, labels, o.threshold, o.prior);
    out["auroc"] = m.auroc;
    out["balanced_accuracy_simple"] = m.balanced_accuracy_simple;
    out["balanced_accuracy_calibrated"] = m.balanced_accuracy_calibrated;
    out["n"] = m.n;
  }
  if (!o.truth.empty() || !o.estimate.empty()) {
    if (o.truth.empty() || o.estimate.empty()) {
      throw Error(ErrorCode::kConfiguration, "structure comparison needs both --truth and --estimate");
    }
    const tamis::RecoveryMetrics r = tamis::CompareStructures(KeysOf(ReadJson(o.truth)), KeysOf(ReadJson(o.estimate)));
    out["recovery"] = {{"choice_accuracy", r.choice_accuracy},
                       {"precision", r.precision},
                       {"recall", r.recall},
                       {"jaccard", r.jaccard},
                       {"perfect_match", r.perfect_match}};
  }
  if (out.empty()) throw Error(ErrorCode::kConfiguration, "evaluate needs --scores or --truth/--estimate");
  Emit(o.out, out.dump(2) + "\n");
  return 0;
}

int RunReplicate(const Options& o) {
  tamis::ExperimentConfig cfg =
      o.config.empty() ? tamis::DefaultExperimentConfig() : tamis::ExperimentConfigFromJson(ReadJson(o.config));
  if (o.seed_set) cfg.seed = o.seed;
  if (!o.epsilon.empty()) cfg.epsilons = {ParseEpsilonFlag(o.epsilon)};
  if (!o.method.empty()) cfg.methods = {tamis::ParseMethod(o.method)};
  if (!o.attack.empty()) cfg.attacks = {tamis::AttackSpec::Parse(o.attack)};
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.threads) cfg.threads = o.threads;
  cfg.Validate();
  const tamis::ExperimentReport report = tamis::RunExperiment(cfg);
  std::cout << json{{"output_dir", cfg.output_dir.string()},
                    {"config_hash", tamis::ConfigHash(cfg)},
                    {"replicas_run", report.replicas_run},
                    {"replicas_resumed", report.replicas_resumed},
                    {"rows", report.rows.size()}}.dump()
            << "\n";
  return 0;
}

int RunSimulate(const Options& o) {
  tamis::PopulationSpec opt;
  if (!o.config.empty()) opt = tamis::PopulationSpecFromJson(ReadJson(o.config));
  if (o.seed_set) opt.seed = o.seed;
  if (o.rows) opt.rows = o.rows;
  const tamis::Population pop = tamis::SimulatePopulation(opt);
  Emit(o.out, tamis::FormatCsv(pop.data));
  return 0;
}

void PrintError(std::string_view code, std::string_view message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphical-model synthetic data generators and membership inference attacks"};
  app.require_subcommand(1);
  Options o;

  auto* generate = app.add_subcommand("generate", "Fit a generator on training data and sample synthetic data");
  AddCommon(generate, o, true);
  generate->add_option("--method", o.method, "MST or PrivBayes");
  generate->add_option("--train", o.train, "Training CSV")->required();
  generate->add_option("--domain", o.domain, "Domain JSON fixing the category encoding");
  generate->add_option("--n-synth", o.n_synth, "Synthetic rows to sample");

  auto* recover = app.add_subcommand("recover", "Estimate the generator structure from synthetic data");
  AddCommon(recover, o, true);
  recover->add_option("--method", o.method, "MST or PrivBayes");
  recover->add_option("--synth", o.synth, "Synthetic CSV")->required();
  recover->add_option("--domain", o.domain, "Domain JSON");

  auto* shadow = app.add_subcommand("shadow", "Compute shadow-model structure weights on auxiliary data");
  AddCommon(shadow, o, true);
  shadow->add_option("--method", o.method, "MST or PrivBayes");
  shadow->add_option("--aux", o.aux, "Auxiliary CSV")->required();
  shadow->add_option("--domain", o.domain, "Domain JSON");
  shadow->add_option("--runs", o.runs, "Number of shadow runs");
  shadow->add_option("--subset-size", o.subset_size, "Rows per shadow run");
  shadow->add_option("--threads", o.threads, "Worker threads");

  auto* attack = app.add_subcommand("attack", "Score records for membership");
  AddCommon(attack, o, true);
  attack->add_option("--attack", o.attack, "Attack name, e.g. TAMIS-MST")->required();
  attack->add_option("--records", o.records, "CSV of records to attack")->required();
  attack->add_option("--synth", o.synth, "Synthetic CSV")->required();
  attack->add_option("--aux", o.aux, "Auxiliary CSV")->required();
  attack->add_option("--domain", o.domain, "Domain JSON");
  attack->add_option("--structure", o.structure, "Structure or model JSON (default: recover from synth)");
  attack->add_option("--weights", o.weights, "Shadow weights JSON");
  attack->add_option("--activation", o.activation, "simple or calibrated");
  attack->add_option("--threshold", o.threshold, "Simple activation threshold");
  attack->add_option("--prior", o.prior, "Member prior for calibrated activation");
  attack->add_flag("--households", o.households, "Aggregate scores by household");

  auto* evaluate = app.add_subcommand("evaluate", "Metrics from scores and labels, or from two structures");
  AddCommon(evaluate, o, false);
  evaluate->add_option("--scores", o.scores, "Scores CSV with a label column");
  evaluate->add_option("--threshold", o.threshold, "Simple activation threshold");
  evaluate->add_option("--prior", o.prior, "Calibration prior (default: empirical)");
  evaluate->add_option("--truth", o.truth, "True structure, model or weights JSON");
  evaluate->add_option("--estimate", o.estimate, "Estimated structure, model or weights JSON");

  auto* replicate = app.add_subcommand("replicate", "Run a full experiment");
  AddCommon(replicate, o, true);
  replicate->add_option("--method", o.method, "Restrict to one method");
  replicate->add_option("--attack", o.attack, "Restrict to one attack");
  replicate->add_option("--threads", o.threads, "Worker threads");

  auto* simulate = app.add_subcommand("simulate", "Write a simulated household population as CSV");
  AddCommon(simulate, o, false);
  simulate->add_option("--rows", o.rows, "Number of rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("usage", e.what());
    return 2;
  }

  try {
    if (generate->parsed()) return RunGenerate(o);
    if (recover->parsed()) return RunRecover(o);
    if (shadow->parsed()) return RunShadow(o);
    if (attack->parsed()) return RunAttack(o);
    if (evaluate->parsed()) return RunEvaluate(o);
    if (replicate->parsed()) return RunReplicate(o);
    if (simulate->parsed()) return RunSimulate(o);
  } catch (const Error& e) {
    PrintError(tamis::ErrorCodeName(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    PrintError("internal", e.what());
    return 1;
  }
  return 1;
}
