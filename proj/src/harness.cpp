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

#include "tamis/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "tamis/error.hpp"
#include "tamis/eval.hpp"
#include "tamis/random.hpp"

namespace tamis {
namespace {

constexpr std::uint64_t kShadowStream = 0x5eed'5ad0'0000'0000ULL;

bool GraphFree(AttackKind kind) {
  return kind == AttackKind::kMarginalsSigma || kind == AttackKind::kMarginalsPi;
}

bool UsesShadow(AttackKind kind) {
  return kind == AttackKind::kMamaMiaMst || kind == AttackKind::kMamaMiaPb;
}

// Whether an attack runs against data from `method`.
bool Applies(const ExperimentConfig& cfg, const AttackSpec& a, Method method) {
  if (a.true_structure) return AttackTarget(a.kind) == method;
  return cfg.cross_targeted || GraphFree(a.kind) || AttackTarget(a.kind) == method;
}

nlohmann::json EpsilonToJson(double eps) {
  if (std::isinf(eps)) return "inf";
  return eps;
}

double EpsilonFromJson(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfiniteEpsilon;
    throw Error(ErrorCode::kConfiguration, "epsilon must be a number or \"inf\"");
  }
  return j.get<double>();
}

double ParseEpsilon(const std::string& s) {
  if (s == "inf") return kInfiniteEpsilon;
  return std::stod(s);
}

// Shortest representation that reads back to the same double.
std::string FormatDouble(double v) {
  char buffer[40];
  const auto res = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, res.ptr);
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string_view ScoreFormName(PrivBayesScoreForm f) {
  return f == PrivBayesScoreForm::kJoint ? "joint" : "conditional";
}

PrivBayesScoreForm ParseScoreForm(std::string_view s) {
  if (s == "joint") return PrivBayesScoreForm::kJoint;
  if (s == "conditional") return PrivBayesScoreForm::kConditional;
  throw Error(ErrorCode::kConfiguration, "score_form must be \"joint\" or \"conditional\"");
}

void AppendBundle(std::vector<MetricRow>& rows, const MetricRow& base, const MetricBundle& m) {
  for (const auto& [name, value] :
       {std::pair<const char*, double>{"auroc", m.auroc},
        {"balanced_accuracy_simple", m.balanced_accuracy_simple},
        {"balanced_accuracy_calibrated", m.balanced_accuracy_calibrated}}) {
    MetricRow row = base;
    row.metric = name;
    row.value = value;
    rows.push_back(std::move(row));
  }
}

void AppendRecovery(std::vector<MetricRow>& rows, const MetricRow& base, const RecoveryMetrics& m) {
  for (const auto& [name, value] :
       {std::pair<const char*, double>{"choice_accuracy", m.choice_accuracy},
        {"precision", m.precision},
        {"recall", m.recall},
        {"jaccard", m.jaccard},
        {"perfect_match", m.perfect_match ? 1.0 : 0.0}}) {
    MetricRow row = base;
    row.metric = name;
    row.value = value;
    rows.push_back(std::move(row));
  }
}

}  // namespace

std::string_view SettingName(Setting s) {
  switch (s) {
    case Setting::kAuxIndividuals: return "aux-individuals";
    case Setting::kTargetIndividuals: return "target-individuals";
    case Setting::kTargetHouseholds: return "target-households";
  }
  return "unknown";
}

Setting ParseSetting(std::string_view name) {
  for (Setting s : {Setting::kAuxIndividuals, Setting::kTargetIndividuals, Setting::kTargetHouseholds}) {
    if (SettingName(s) == name) return s;
  }
  throw Error(ErrorCode::kConfiguration, "unknown setting '" + std::string(name) + "'");
}

std::string AttackSpec::Name() const {
  std::string name(AttackName(kind));
  if (true_structure) name += '*';
  return name;
}

AttackSpec AttackSpec::Parse(std::string_view name) {
  AttackSpec opt;
  if (!name.empty() && name.back() == '*') {
    opt.true_structure = true;
    name.remove_suffix(1);
  }
  opt.kind = ParseAttack(name);
  if (opt.true_structure && (GraphFree(opt.kind) || UsesShadow(opt.kind))) {
    throw Error(ErrorCode::kConfiguration, "'" + std::string(name) + "' has no true-structure variant");
  }
  return opt;
}

void ExperimentConfig::Validate() const {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfiguration, msg); };
  if (replicas == 0) fail("replicas must be at least 1");
  if (epsilons.empty()) fail("epsilon grid is empty");
  for (double e : epsilons) {
    if (!(e > 0.0)) fail("epsilons must be positive");
  }
  if (methods.empty()) fail("no methods configured");
  if (attacks.empty()) fail("no attacks configured");
  if (settings.empty()) fail("no settings configured");
  if (n_synth == 0) fail("n_synth must be positive");
  if (!(threshold >= 0.0 && threshold <= 1.0)) fail("threshold must lie in [0, 1]");
  if (!(household_prior > 0.0 && household_prior < 1.0)) fail("household_prior must lie in (0, 1)");
  if (individual_prior && !(*individual_prior > 0.0 && *individual_prior < 1.0)) {
    fail("individual_prior must lie in (0, 1)");
  }
  split_budget.Validate();
  const bool shadow = std::any_of(attacks.begin(), attacks.end(),
                                  [](const AttackSpec& a) { return UsesShadow(a.kind); });
  if (shadow && shadow_runs == 0) fail("shadow_runs must be at least 1");
}

ExperimentConfig DefaultExperimentConfig() {
  ExperimentConfig cfg;
  for (const char* name : {"TAMIS-MST", "MAMAMIA-MST", "Hybrid-MST", "TAMIS-PB", "MAMAMIA-PB",
                           "Hybrid-PB", "TAMIS-PB*", "Hybrid-PB*"}) {
    cfg.attacks.push_back(AttackSpec::Parse(name));
  }
  return cfg;
}

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["replicas"] = cfg.replicas;
  j["epsilons"] = nlohmann::json::array();
  for (double e : cfg.epsilons) j["epsilons"].push_back(EpsilonToJson(e));
  j["methods"] = nlohmann::json::array();
  for (Method m : cfg.methods) j["methods"].push_back(MethodName(m));
  j["attacks"] = nlohmann::json::array();
  for (const auto& a : cfg.attacks) j["attacks"].push_back(a.Name());
  j["cross_targeted"] = cfg.cross_targeted;
  j["settings"] = nlohmann::json::array();
  for (Setting s : cfg.settings) j["settings"].push_back(SettingName(s));
  j["n_synth"] = cfg.n_synth;
  j["delta"] = cfg.delta;
  j["theta"] = cfg.theta;
  j["budget_split"] = {{"selection", cfg.split_budget.selection},
                       {"measurement", cfg.split_budget.measurement}};
  j["max_parents"] = cfg.max_parents;
  j["score_form"] = ScoreFormName(cfg.score_form);
  j["split"] = {{"n_target_households", cfg.split.n_target_households},
                {"min_household_size", cfg.split.min_household_size},
                {"train_size", cfg.split.train_size},
                {"member_fraction_of_households", cfg.split.member_fraction_of_households}};
  j["shadow_runs"] = cfg.shadow_runs;
  j["activation"] = {{"threshold", cfg.threshold}, {"household_prior", cfg.household_prior}};
  j["activation"]["individual_prior"] =
      cfg.individual_prior ? nlohmann::json(*cfg.individual_prior) : nlohmann::json(nullptr);
  if (cfg.aux_path) {
    j["aux_path"] = cfg.aux_path->string();
  } else {
    j["population"] = PopulationSpecToJson(cfg.population);
  }
  j["output_dir"] = cfg.output_dir.string();
  j["threads"] = cfg.threads;
  return j;
}

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfiguration, "experiment config must be a JSON object");
  ExperimentConfig cfg = DefaultExperimentConfig();
  try {
    cfg.seed = j.value("seed", cfg.seed);
    cfg.replicas = j.value("replicas", cfg.replicas);
    if (j.contains("epsilons")) {
      cfg.epsilons.clear();
      for (const auto& e : j.at("epsilons")) cfg.epsilons.push_back(EpsilonFromJson(e));
    }
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) cfg.methods.push_back(ParseMethod(m.get<std::string>()));
    }
    if (j.contains("attacks")) {
      cfg.attacks.clear();
      for (const auto& a : j.at("attacks")) cfg.attacks.push_back(AttackSpec::Parse(a.get<std::string>()));
    }
    cfg.cross_targeted = j.value("cross_targeted", cfg.cross_targeted);
    if (j.contains("settings")) {
      cfg.settings.clear();
      for (const auto& s : j.at("settings")) cfg.settings.push_back(ParseSetting(s.get<std::string>()));
    }
    cfg.n_synth = j.value("n_synth", cfg.n_synth);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.theta = j.value("theta", cfg.theta);
    if (j.contains("budget_split")) {
      cfg.split_budget.selection = j["budget_split"].value("selection", cfg.split_budget.selection);
      cfg.split_budget.measurement = j["budget_split"].value("measurement", cfg.split_budget.measurement);
    }
    cfg.max_parents = j.value("max_parents", cfg.max_parents);
    if (j.contains("score_form")) cfg.score_form = ParseScoreForm(j.at("score_form").get<std::string>());
    if (j.contains("split")) {
      const auto& s = j.at("split");
      cfg.split.n_target_households = s.value("n_target_households", cfg.split.n_target_households);
      cfg.split.min_household_size = s.value("min_household_size", cfg.split.min_household_size);
      cfg.split.train_size = s.value("train_size", cfg.split.train_size);
      cfg.split.member_fraction_of_households =
          s.value("member_fraction_of_households", cfg.split.member_fraction_of_households);
    }
    cfg.shadow_runs = j.value("shadow_runs", cfg.shadow_runs);
    if (j.contains("activation")) {
      const auto& a = j.at("activation");
      cfg.threshold = a.value("threshold", cfg.threshold);
      cfg.household_prior = a.value("household_prior", cfg.household_prior);
      if (a.contains("individual_prior") && !a.at("individual_prior").is_null()) {
        cfg.individual_prior = a.at("individual_prior").get<double>();
      }
    }
    if (j.contains("aux_path") && !j.at("aux_path").is_null()) {
      cfg.aux_path = j.at("aux_path").get<std::string>();
    }
    if (j.contains("population")) cfg.population = PopulationSpecFromJson(j.at("population"));
    cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
    cfg.threads = j.value("threads", cfg.threads);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfiguration, std::string("malformed experiment config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

std::string ConfigHash(const ExperimentConfig& cfg) {
  nlohmann::json j = ExperimentConfigToJson(cfg);
  j.erase("output_dir");
  j.erase("threads");
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

std::string FormatEpsilon(double epsilon) {
  return std::isinf(epsilon) ? std::string("inf") : FormatDouble(epsilon);
}

ExperimentContext PrepareExperiment(const ExperimentConfig& cfg) {
  cfg.Validate();
  ExperimentContext ctx;
  ctx.aux = cfg.aux_path ? LoadCsv(*cfg.aux_path) : SimulatePopulation(cfg.population).data;

  std::set<Method> shadow_methods;
  for (const auto& a : cfg.attacks) {
    if (!UsesShadow(a.kind)) continue;
    for (Method m : cfg.methods) {
      if (Applies(cfg, a, m)) shadow_methods.insert(AttackTarget(a.kind));
    }
  }
  for (Method assumed : shadow_methods) {
    for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
      ShadowConfig sc;
      sc.runs = cfg.shadow_runs;
      sc.subset_size = std::min(cfg.split.train_size, ctx.aux.rows());
      sc.dp = DpParams{cfg.epsilons[e], cfg.delta, cfg.theta, 0};
      sc.split = cfg.split_budget;
      sc.max_parents = cfg.max_parents;
      sc.score_form = cfg.score_form;
      sc.seed = DeriveSeed(DeriveSeed(cfg.seed ^ kShadowStream, static_cast<std::uint64_t>(assumed)), e);
      sc.threads = cfg.threads;
      ctx.shadow[{assumed, cfg.epsilons[e]}] = ComputeShadowWeights(ctx.aux, assumed, sc);
    }
  }
  return ctx;
}

std::vector<MetricRow> RunReplica(const ExperimentConfig& cfg, const ExperimentContext& ctx,
                                  std::size_t replica) {
  const std::uint64_t replica_seed = DeriveSeed(cfg.seed, replica);
  SplitSpec opt = cfg.split;
  opt.seed = DeriveSeed(replica_seed, 0);
  const SnakeSplit split = MakeSnakeSplit(ctx.aux, opt);

  const bool want_aux = std::count(cfg.settings.begin(), cfg.settings.end(), Setting::kAuxIndividuals) > 0;
  const bool want_target_ind =
      std::count(cfg.settings.begin(), cfg.settings.end(), Setting::kTargetIndividuals) > 0;
  const bool want_households =
      std::count(cfg.settings.begin(), cfg.settings.end(), Setting::kTargetHouseholds) > 0;
  // Target rows are a subset of aux, so scoring aux once covers every setting.
  const Dataset& attacked = want_aux ? ctx.aux : split.target;
  const std::vector<std::uint8_t> aux_labels = want_aux ? AuxMembership(ctx.aux, split)
                                                        : std::vector<std::uint8_t>{};
  const std::vector<HouseholdId>& target_households = *split.target.households();
  const std::set<HouseholdId> members(split.member_households.begin(), split.member_households.end());
  std::vector<std::uint8_t> household_labels;
  for (HouseholdId h : std::set<HouseholdId>(target_households.begin(), target_households.end())) {
    household_labels.push_back(members.count(h) ? 1 : 0);
  }

  const auto individual_prior = [&](std::span<const std::uint8_t> labels) {
    if (cfg.individual_prior) return *cfg.individual_prior;
    const auto positives = std::count(labels.begin(), labels.end(), std::uint8_t{1});
    return static_cast<double>(positives) / static_cast<double>(labels.size());
  };

  std::vector<MetricRow> rows;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const Method method = cfg.methods[mi];
    for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
      const double eps = cfg.epsilons[ei];
      const std::string stage = std::string(MethodName(method)) + " eps=" + FormatEpsilon(eps);
      try {
        GeneratorConfig gen;
        gen.method = method;
        gen.dp = DpParams{eps, cfg.delta, cfg.theta, DeriveSeed(DeriveSeed(replica_seed, 1 + mi), ei)};
        gen.n_synth = cfg.n_synth;
        gen.split = cfg.split_budget;
        gen.max_parents = cfg.max_parents;
        gen.score_form = cfg.score_form;
        const SynthModel model = Fit(split.train, gen);
        const Dataset synth = Sample(model, cfg.n_synth, DeriveSeed(gen.dp.seed, 1));

        std::vector<Edge> true_tree;
        std::vector<Family> true_network;
        if (const auto* t = std::get_if<TreeModel>(&model)) true_tree = t->edges;
        if (const auto* b = std::get_if<BayesNetModel>(&model)) true_network = b->order;

        std::optional<std::vector<Edge>> recovered_tree;
        std::optional<std::vector<Family>> recovered_network;
        const auto tree = [&]() -> const std::vector<Edge>& {
          if (!recovered_tree) recovered_tree = RecoverTree(synth);
          return *recovered_tree;
        };
        const auto network = [&]() -> const std::vector<Family>& {
          if (!recovered_network) {
            DpParams dp = gen.dp;
            dp.seed = DeriveSeed(gen.dp.seed, 2);
            recovered_network =
                RecoverBayesNet(synth, dp, PrivBayesOptions{cfg.split_budget, cfg.max_parents, cfg.score_form});
          }
          return *recovered_network;
        };

        MetricRow base{"", std::string(MethodName(method)), "structure", eps, replica, "", 0.0};
        const KeySet truth = method == Method::kMst ? StructureKeys(true_tree) : StructureKeys(true_network);
        base.attack = method == Method::kMst ? "recover_tree" : "recover_bayesnet";
        AppendRecovery(rows, base,
                       CompareStructures(truth, method == Method::kMst ? StructureKeys(tree())
                                                                       : StructureKeys(network())));
        if (const auto it = ctx.shadow.find({method, eps}); it != ctx.shadow.end()) {
          base.attack = "shadow";
          AppendRecovery(rows, base, CompareStructures(truth, StructureKeys(it->second)));
        }

        for (const AttackSpec& a : cfg.attacks) {
          if (!Applies(cfg, a, method)) continue;
          const Method family = AttackTarget(a.kind);
          AttackInputs in;
          in.records = &attacked;
          in.synth = &synth;
          in.aux = &ctx.aux;
          if (!GraphFree(a.kind) && !UsesShadow(a.kind)) {
            if (family == Method::kMst) {
              in.tree = a.true_structure ? true_tree : tree();
            } else {
              in.network = a.true_structure ? true_network : network();
            }
          }
          if (UsesShadow(a.kind)) in.weights = &ctx.shadow.at({family, eps});
          const ScoreVector scores = ScoreAttack(a.kind, in);

          MetricRow row{a.Name(), std::string(MethodName(method)), "", eps, replica, "", 0.0};
          if (want_aux) {
            row.setting = SettingName(Setting::kAuxIndividuals);
            AppendBundle(rows, row, Evaluate(scores, aux_labels, cfg.threshold, individual_prior(aux_labels)));
          }
          ScoreVector target = scores;
          if (want_aux) {
            target.log_scores.clear();
            target.ids.clear();
            for (std::size_t k = 0; k < split.target_rows.size(); ++k) {
              target.log_scores.push_back(scores.log_scores[split.target_rows[k]]);
              target.ids.push_back(static_cast<std::int64_t>(k));
            }
          }
          if (want_target_ind) {
            row.setting = SettingName(Setting::kTargetIndividuals);
            AppendBundle(rows, row,
                         Evaluate(target, split.labels, cfg.threshold, individual_prior(split.labels)));
          }
          if (want_households) {
            row.setting = SettingName(Setting::kTargetHouseholds);
            const ScoreVector households = AggregateHouseholds(target, target_households);
            AppendBundle(rows, row, Evaluate(households, household_labels, cfg.threshold, cfg.household_prior));
          }
        }
      } catch (const Error& e) {
        throw Error(e.code(), "replica " + std::to_string(replica) + ", " + stage + ": " + e.what());
      }
    }
  }
  return rows;
}

std::string FormatMetricsCsv(const std::vector<MetricRow>& rows) {
  std::string out = "attack,method,setting,epsilon,replica,metric,value\n";
  for (const auto& r : rows) {
    out += r.attack + ',' + r.method + ',' + r.setting + ',' + FormatEpsilon(r.epsilon) + ',' +
           std::to_string(r.replica) + ',' + r.metric + ',' + FormatDouble(r.value) + '\n';
  }
  return out;
}

std::vector<MetricRow> ParseMetricsCsv(std::string_view text) {
  std::vector<MetricRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string field; std::getline(ls, field, ',');) f.push_back(field);
    if (f.size() != 7) throw Error(ErrorCode::kParse, "metrics row needs 7 fields: " + line);
    try {
      rows.push_back({f[0], f[1], f[2], ParseEpsilon(f[3]), std::stoull(f[4]), f[5], std::stod(f[6])});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kParse, "bad number in metrics row: " + line);
    }
  }
  return rows;
}

nlohmann::json SummarizeMetrics(const std::vector<MetricRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string, double, std::string>;
  std::map<Key, std::vector<double>> cells;
  for (const auto& r : rows) cells[{r.attack, r.method, r.setting, r.epsilon, r.metric}].push_back(r.value);
  nlohmann::json out = nlohmann::json::array();
  for (auto& [key, values] : cells) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    const double median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    out.push_back({{"attack", std::get<0>(key)},
                   {"method", std::get<1>(key)},
                   {"setting", std::get<2>(key)},
                   {"epsilon", EpsilonToJson(std::get<3>(key))},
                   {"metric", std::get<4>(key)},
                   {"count", values.size()},
                   {"mean", mean},
                   {"stdv", std::sqrt(var / n)},
                   {"median", median}});
  }
  return out;
}

ExperimentReport RunExperiment(const ExperimentConfig& cfg) {
  cfg.Validate();
  namespace fs = std::filesystem;
  const std::string hash = ConfigHash(cfg);
  const fs::path dir = cfg.output_dir;
  const fs::path replica_dir = dir / "replicas";
  std::error_code ec;
  fs::create_directories(replica_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + replica_dir.string() + ": " + ec.message());

  const fs::path config_path = dir / "config.json";
  if (fs::exists(config_path)) {
    nlohmann::json stored;
    try {
      stored = nlohmann::json::parse(ReadText(config_path));
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kParse, "unreadable " + config_path.string());
    }
    if (stored.value("config_hash", std::string()) != hash) {
      throw Error(ErrorCode::kConfiguration,
                  "config hash mismatch with existing results in " + dir.string() + "; refusing to mix");
    }
  } else {
    WriteText(config_path, nlohmann::json{{"config_hash", hash}, {"config", ExperimentConfigToJson(cfg)}}.dump(2) + "\n");
  }

  const auto csv_path = [&](std::size_t r) {
    char name[32];
    std::snprintf(name, sizeof(name), "replica_%04zu.csv", r);
    return replica_dir / name;
  };
  const auto done_path = [&](std::size_t r) {
    fs::path p = csv_path(r);
    p.replace_extension(".done");
    return p;
  };

  ExperimentReport report;
  std::vector<std::vector<MetricRow>> per_replica(cfg.replicas);
  std::vector<std::size_t> pending;
  for (std::size_t r = 0; r < cfg.replicas; ++r) {
    if (fs::exists(done_path(r)) && fs::exists(csv_path(r))) {
      if (ReadText(done_path(r)) != hash) {
        throw Error(ErrorCode::kConfiguration, "replica marker " + done_path(r).string() + " has a different config hash");
      }
      per_replica[r] = ParseMetricsCsv(ReadText(csv_path(r)));
      ++report.replicas_resumed;
    } else {
      pending.push_back(r);
    }
  }

  if (!pending.empty()) {
    const ExperimentContext ctx = PrepareExperiment(cfg);
    const auto run = [&](std::size_t r) {
      per_replica[r] = RunReplica(cfg, ctx, r);
      WriteText(csv_path(r), FormatMetricsCsv(per_replica[r]));
      WriteText(done_path(r), hash);
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, pending.size()));
    if (threads == 1) {
      for (std::size_t r : pending) run(r);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::exception_ptr> errors(threads);
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t k = next++; k < pending.size(); k = next++) run(pending[k]);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    report.replicas_run = pending.size();
  }

  for (auto& rows : per_replica) {
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  report.summary = SummarizeMetrics(report.rows);
  WriteText(dir / "metrics.csv", FormatMetricsCsv(report.rows));
  WriteText(dir / "summary.json", report.summary.dump(2) + "\n");
  return report;
}

}  // namespace tamis
