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

#include "tamis/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "tamis/error.hpp"
#include "tamis/marginals.hpp"

namespace tamis {

std::uint64_t ShadowWeights::Total() const {
  std::uint64_t total = 0;
  for (const auto& [key, w] : edge_weights) total += w;
  for (const auto& [key, w] : family_weights) total += w;
  return total;
}

std::vector<Edge> RecoverTree(const Dataset& synth, RecoveryCost* cost) {
  const std::size_t d = synth.num_attributes();
  if (d < 2) throw Error(ErrorCode::kConfiguration, "tree recovery needs at least two attributes");
  if (synth.empty()) throw Error(ErrorCode::kEstimation, "tree recovery needs synthetic rows");

  std::vector<MarginalTable> one_way;
  one_way.reserve(d);
  for (std::size_t i = 0; i < d; ++i) one_way.push_back(Marginal(synth, {i}));
  if (cost) cost->one_way_tables += d;

  std::vector<double> scores;
  scores.reserve(d * (d - 1) / 2);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const MarginalTable joint = Marginal(synth, {i, j});
      const auto& pa = one_way[i].probs();
      const auto& pb = one_way[j].probs();
      double score = 0.0;
      for (std::size_t a = 0; a < pa.size(); ++a) {
        for (std::size_t b = 0; b < pb.size(); ++b) {
          score += std::abs(joint.at(a * pb.size() + b) - pa[a] * pb[b]);
        }
      }
      scores.push_back(score);
    }
  }
  if (cost) {
    cost->two_way_tables += scores.size();
    cost->spanning_tree_runs += 1;
  }
  auto tree = MaximumSpanningTree(d, scores);
  std::sort(tree.begin(), tree.end());
  return tree;
}

std::vector<Family> RecoverBayesNet(const Dataset& synth, const DpParams& dp,
                                    const PrivBayesOptions& options) {
  Rng rng(dp.seed);
  return SelectPrivBayesStructure(synth, dp, options, rng);
}

ShadowWeights ComputeShadowWeights(const Dataset& aux, Method method, const ShadowConfig& cfg) {
  if (cfg.subset_size > aux.rows()) {
    throw Error(ErrorCode::kConfiguration, "shadow subset size exceeds the auxiliary data size");
  }
  if (cfg.runs == 0) throw Error(ErrorCode::kConfiguration, "shadow modeling needs at least one run");

  // Each run writes its own slot, so the merge below is order-independent of
  // thread scheduling.
  std::vector<std::vector<Edge>> run_edges(cfg.runs);
  std::vector<std::vector<Family>> run_families(cfg.runs);
  auto run = [&](std::size_t k) {
    Rng rng(DeriveSeed(cfg.seed, k));
    auto rows = rng.SampleWithoutReplacement(aux.rows(), cfg.subset_size);
    std::sort(rows.begin(), rows.end());
    const Dataset subset = aux.Select(rows);
    if (method == Method::kMst) {
      run_edges[k] = SelectMstStructure(subset, cfg.dp, cfg.split, rng).edges;
    } else {
      const PrivBayesOptions options{cfg.split, cfg.max_parents, cfg.score_form};
      run_families[k] = SelectPrivBayesStructure(subset, cfg.dp, options, rng);
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, cfg.runs));
  if (threads == 1) {
    for (std::size_t k = 0; k < cfg.runs; ++k) run(k);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t k = t; k < cfg.runs; k += threads) run(k);
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

  ShadowWeights w;
  w.method = method;
  w.runs = cfg.runs;
  w.num_attributes = aux.num_attributes();
  for (const auto& edges : run_edges) {
    for (const Edge& e : edges) ++w.edge_weights[e];
  }
  for (const auto& order : run_families) {
    for (const Family& f : order) ++w.family_weights[f];
  }
  return w;
}

ShadowWeights IndicatorWeights(std::size_t num_attributes, std::span<const Edge> edges) {
  ShadowWeights w;
  w.method = Method::kMst;
  w.runs = 1;
  w.num_attributes = num_attributes;
  for (const Edge& e : edges) w.edge_weights[e] = 1;
  return w;
}

ShadowWeights IndicatorWeights(std::size_t num_attributes, std::span<const Family> order) {
  ShadowWeights w;
  w.method = Method::kPrivBayes;
  w.runs = 1;
  w.num_attributes = num_attributes;
  for (const Family& f : order) w.family_weights[f] = 1;
  return w;
}

nlohmann::json ShadowWeightsToJson(const ShadowWeights& w) {
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& [e, count] : w.edge_weights) weights[EdgeKey(e)] = count;
  for (const auto& [f, count] : w.family_weights) weights[FamilyKey(f)] = count;
  return {{"method", MethodName(w.method)},
          {"runs", w.runs},
          {"num_attributes", w.num_attributes},
          {"weights", weights}};
}

ShadowWeights ShadowWeightsFromJson(const nlohmann::json& j) {
  ShadowWeights w;
  w.method = ParseMethod(j.at("method").get<std::string>());
  w.runs = j.at("runs").get<std::size_t>();
  w.num_attributes = j.value("num_attributes", std::size_t{0});
  for (const auto& [key, count] : j.at("weights").items()) {
    if (w.method == Method::kMst) {
      w.edge_weights[ParseEdgeKey(key)] = count.get<std::uint64_t>();
    } else {
      w.family_weights[ParseFamilyKey(key)] = count.get<std::uint64_t>();
    }
  }
  return w;
}

}  // namespace tamis
