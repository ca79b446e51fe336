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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <limits>

#include "tamis/attack.hpp"
#include "tamis/data.hpp"
#include "tamis/error.hpp"
#include "tamis/eval.hpp"
#include "tamis/harness.hpp"
#include "tamis/population.hpp"
#include "tamis/recovery.hpp"
#include "tamis/sdg.hpp"

namespace py = pybind11;
using namespace tamis;

namespace {

// Wrapped so the variant is not converted by the stl casters.
struct ModelHandle {
  SynthModel model;
};

std::vector<std::string> Keys(const SynthModel& model) {
  std::vector<std::string> keys;
  if (const auto* t = std::get_if<TreeModel>(&model)) {
    for (const Edge& e : t->edges) keys.push_back(EdgeKey(e));
  } else {
    for (const Family& f : std::get<BayesNetModel>(model).order) keys.push_back(FamilyKey(f));
  }
  return keys;
}

DpParams Dp(double epsilon, std::uint64_t seed, double delta, double theta) {
  DpParams dp{epsilon, delta, theta, seed};
  dp.Validate();
  return dp;
}

std::vector<Dataset> Align(const std::vector<Dataset>& parts) {
  const Domain domain = MergeDomains(parts);
  std::vector<Dataset> out;
  for (const Dataset& d : parts) out.push_back(ParseCsv(FormatCsv(d), domain));
  return out;
}

std::vector<double> Exp(const std::vector<double>& logs) {
  std::vector<double> v;
  for (double l : logs) v.push_back(std::exp(l));
  return v;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graphical-model synthetic data generators and membership inference attacks";

  // Owned by the module for the life of the interpreter.
  static PyObject* error_type = py::exception<Error>(m, "TamisError", PyExc_RuntimeError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error_type, (std::string(ErrorCodeName(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("rows", &Dataset::rows)
      .def_property_readonly("columns",
                             [](const Dataset& d) {
                               std::vector<std::string> names;
                               for (const auto& a : d.domain().attributes()) names.push_back(a.name);
                               return names;
                             })
      .def_property_readonly("cardinalities", [](const Dataset& d) { return d.domain().cardinalities(); })
      .def_property_readonly("households", [](const Dataset& d) { return d.households(); })
      .def_property_readonly("membership", [](const Dataset& d) { return d.membership(); })
      .def("row", [](const Dataset& d, std::size_t r) {
        if (r >= d.rows()) throw py::index_error("row out of range");
        const auto x = d.row(r);
        return std::vector<Value>(x.begin(), x.end());
      })
      .def("to_csv", &FormatCsv)
      .def("__len__", &Dataset::rows);

  m.def("load_csv", [](const std::filesystem::path& p) { return LoadCsv(p); }, py::arg("path"));
  m.def("parse_csv", [](const std::string& text) { return ParseCsv(text); }, py::arg("text"));
  m.def("align", &Align, py::arg("datasets"),
        "Re-encode datasets under the union of their categories.");
  m.def(
      "simulate_population",
      [](std::size_t rows, std::size_t attributes, std::uint64_t seed) {
        PopulationSpec opt;
        opt.rows = rows;
        opt.attributes = attributes;
        opt.seed = seed;
        return SimulatePopulation(opt).data;
      },
      py::arg("rows") = 50'000, py::arg("attributes") = 8, py::arg("seed") = 0);

  py::class_<ModelHandle>(m, "Model")
      .def_property_readonly("method",
                             [](const ModelHandle& h) {
                               return std::string(MethodName(std::holds_alternative<TreeModel>(h.model)
                                                                 ? Method::kMst
                                                                 : Method::kPrivBayes));
                             })
      .def_property_readonly("structure", [](const ModelHandle& h) { return Keys(h.model); })
      .def(
          "sample", [](const ModelHandle& h, std::size_t n, std::uint64_t seed) { return Sample(h.model, n, seed); },
          py::arg("n"), py::arg("seed") = 0)
      .def("density",
           [](const ModelHandle& h, const std::vector<Value>& x) {
             if (x.size() != std::visit([](const auto& m) { return m.domain.size(); }, h.model)) {
               throw Error(ErrorCode::kSchemaViolation, "record length does not match the domain");
             }
             if (const auto* t = std::get_if<TreeModel>(&h.model)) return TreeDensity(*t, x);
             return BayesDensity(std::get<BayesNetModel>(h.model), x);
           })
      .def("to_json", [](const ModelHandle& h) { return ModelToJson(h.model).dump(); });

  m.def(
      "fit",
      [](const Dataset& train, const std::string& method, double epsilon, std::uint64_t seed, double delta,
         double theta, std::size_t max_parents) {
        GeneratorConfig cfg;
        cfg.method = ParseMethod(method);
        cfg.dp = Dp(epsilon, seed, delta, theta);
        cfg.max_parents = max_parents;
        return ModelHandle{Fit(train, cfg)};
      },
      py::arg("train"), py::arg("method") = "MST", py::arg("epsilon") = 1.0, py::arg("seed") = 0,
      py::arg("delta") = 1e-9, py::arg("theta") = 4e-4, py::arg("max_parents") = 3,
      "Fit a generator. epsilon=float('inf') disables noise.");

  m.def(
      "recover",
      [](const Dataset& synth, const std::string& method, double epsilon, std::uint64_t seed) {
        std::vector<std::string> keys;
        if (ParseMethod(method) == Method::kMst) {
          for (const Edge& e : RecoverTree(synth)) keys.push_back(EdgeKey(e));
        } else {
          for (const Family& f : RecoverBayesNet(synth, Dp(epsilon, seed, 1e-9, 4e-4))) keys.push_back(FamilyKey(f));
        }
        return keys;
      },
      py::arg("synth"), py::arg("method") = "MST", py::arg("epsilon") = 1.0, py::arg("seed") = 0);

  m.def(
      "shadow_weights",
      [](const Dataset& aux, const std::string& method, double epsilon, std::size_t runs, std::size_t subset_size,
         std::uint64_t seed) {
        ShadowConfig cfg;
        cfg.runs = runs;
        cfg.subset_size = subset_size;
        cfg.dp = Dp(epsilon, 0, 1e-9, 4e-4);
        cfg.seed = seed;
        const ShadowWeights w = ComputeShadowWeights(aux, ParseMethod(method), cfg);
        std::map<std::string, std::uint64_t> out;
        for (const auto& [e, c] : w.edge_weights) out[EdgeKey(e)] = c;
        for (const auto& [f, c] : w.family_weights) out[FamilyKey(f)] = c;
        return out;
      },
      py::arg("aux"), py::arg("method") = "MST", py::arg("epsilon") = 1.0, py::arg("runs") = 50,
      py::arg("subset_size") = 10'000, py::arg("seed") = 0);

  m.def(
      "attack",
      [](const std::string& name, const Dataset& records, const Dataset& synth, const Dataset& aux,
         std::optional<std::vector<std::string>> structure,
         std::optional<std::map<std::string, std::uint64_t>> weights) {
        const AttackKind kind = ParseAttack(name);
        const Method family = AttackTarget(kind);
        AttackInputs in{&records, &synth, &aux, {}, {}, nullptr};
        if (structure) {
          for (const auto& k : *structure) {
            if (family == Method::kMst) {
              in.tree.push_back(ParseEdgeKey(k));
            } else {
              in.network.push_back(ParseFamilyKey(k));
            }
          }
        } else if (family == Method::kMst) {
          in.tree = RecoverTree(synth);
        } else {
          in.network = RecoverBayesNet(synth, DpParams{});
        }
        ShadowWeights w;
        if (weights) {
          w.method = family;
          w.num_attributes = records.num_attributes();
          for (const auto& [k, c] : *weights) {
            if (family == Method::kMst) {
              w.edge_weights[ParseEdgeKey(k)] = c;
            } else {
              w.family_weights[ParseFamilyKey(k)] = c;
            }
          }
          in.weights = &w;
        }
        return ScoreAttack(kind, in).log_scores;
      },
      py::arg("name"), py::arg("records"), py::arg("synth"), py::arg("aux"), py::arg("structure") = py::none(),
      py::arg("weights") = py::none(),
      "Natural-log membership scores. Without a structure, it is recovered from synth.");

  m.def(
      "aggregate_households",
      [](const std::vector<double>& log_scores, const std::vector<HouseholdId>& households) {
        ScoreVector s;
        s.log_scores = log_scores;
        for (std::size_t i = 0; i < log_scores.size(); ++i) s.ids.push_back(static_cast<std::int64_t>(i));
        const ScoreVector h = AggregateHouseholds(s, households);
        return std::make_pair(h.ids, h.log_scores);
      },
      py::arg("log_scores"), py::arg("households"));

  m.def(
      "activate",
      [](const std::vector<double>& log_scores, const std::string& regime, double threshold,
         std::optional<double> prior) {
        ScoreVector s;
        s.log_scores = log_scores;
        s.ids.resize(log_scores.size());
        ActivationConfig cfg;
        cfg.threshold = threshold;
        cfg.prior = prior;
        if (regime == "calibrated") {
          cfg.regime = ActivationRegime::kCalibrated;
        } else if (regime != "simple") {
          throw Error(ErrorCode::kConfiguration, "regime must be 'simple' or 'calibrated'");
        }
        const Activation a = Activate(s, cfg);
        return std::make_pair(a.probabilities, a.predictions);
      },
      py::arg("log_scores"), py::arg("regime") = "simple", py::arg("threshold") = 0.5,
      py::arg("prior") = py::none());

  m.def("auroc", [](const std::vector<double>& s, const std::vector<std::uint8_t>& y) { return Auroc(s, y); },
        py::arg("scores"), py::arg("labels"));
  m.def("balanced_accuracy",
        [](const std::vector<std::uint8_t>& p, const std::vector<std::uint8_t>& y) { return BalancedAccuracy(p, y); },
        py::arg("predictions"), py::arg("labels"));
  m.def(
      "compare_structures",
      [](const std::vector<std::string>& truth, const std::vector<std::string>& estimate) {
        const RecoveryMetrics r =
            CompareStructures(KeySet(truth.begin(), truth.end()), KeySet(estimate.begin(), estimate.end()));
        return py::dict(py::arg("choice_accuracy") = r.choice_accuracy, py::arg("precision") = r.precision,
                        py::arg("recall") = r.recall, py::arg("jaccard") = r.jaccard,
                        py::arg("perfect_match") = r.perfect_match);
      },
      py::arg("truth"), py::arg("estimate"));

  m.def(
      "replicate",
      [](const std::string& config_json) {
        const ExperimentConfig cfg = ExperimentConfigFromJson(nlohmann::json::parse(config_json));
        const ExperimentReport report = RunExperiment(cfg);
        return FormatMetricsCsv(report.rows);
      },
      py::arg("config_json"), "Run an experiment from a JSON config; returns the metrics CSV.");
  m.def("default_config", [] { return ExperimentConfigToJson(DefaultExperimentConfig()).dump(2); });
  m.def("exp", &Exp, py::arg("log_scores"));

  m.attr("INF") = std::numeric_limits<double>::infinity();
}
