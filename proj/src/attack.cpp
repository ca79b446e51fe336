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

#include "tamis/attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "tamis/error.hpp"
#include "tamis/marginals.hpp"

namespace tamis {
namespace {

// log(mu_synth / mu_aux) over the cells of one attribute tuple.
class LogRatioTable {
 public:
  LogRatioTable(const Dataset& synth, const Dataset& aux, const AttrList& attrs) : attrs_(attrs) {
    const MarginalTable s = Marginal(synth, attrs).Floored(DefaultFloor(synth.rows()));
    const MarginalTable a = Marginal(aux, attrs).Floored(DefaultFloor(aux.rows()));
    Init(s.shape(), s.probs(), a.probs());
  }

  LogRatioTable(const Dataset& synth, const Dataset& aux, const Family& f) {
    const ConditionalTable s = Conditional(synth, f.node, f.parents, DefaultFloor(synth.rows()));
    const ConditionalTable a = Conditional(aux, f.node, f.parents, DefaultFloor(aux.rows()));
    attrs_ = f.parents;
    attrs_.push_back(f.node);
    std::vector<std::size_t> shape = s.parent_shape();
    shape.push_back(s.child_cardinality());
    Init(shape, s.probs(), a.probs());
  }

  double operator()(std::span<const Value> record) const {
    std::size_t index = 0;
    for (std::size_t k = 0; k < attrs_.size(); ++k) {
      if (record[attrs_[k]] >= shape_[k]) throw Error(ErrorCode::kBounds, "record outside the domain");
      index += record[attrs_[k]] * strides_[k];
    }
    return log_ratio_[index];
  }

 private:
  void Init(const std::vector<std::size_t>& shape, const std::vector<double>& s,
            const std::vector<double>& a) {
    shape_ = shape;
    strides_.assign(shape.size(), 1);
    for (std::size_t k = shape.size(); k > 1; --k) strides_[k - 2] = strides_[k - 1] * shape[k - 1];
    log_ratio_.resize(s.size());
    for (std::size_t c = 0; c < s.size(); ++c) log_ratio_[c] = std::log(s[c]) - std::log(a[c]);
  }

  AttrList attrs_;
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> log_ratio_;
};

void CheckInputs(const Dataset& records, const Dataset& synth, const Dataset& aux) {
  if (synth.empty() || aux.empty()) {
    throw Error(ErrorCode::kEstimation, "attack needs non-empty synthetic and auxiliary data");
  }
  if (!(records.domain() == synth.domain()) || !(synth.domain() == aux.domain())) {
    throw Error(ErrorCode::kSchemaViolation, "attacked, synthetic and auxiliary data domains differ");
  }
}

// log( sum_k w_k exp(l_k) / sum_k w_k ), skipping zero weights.
double LogWeightedMean(std::span<const double> log_terms, std::span<const double> weights) {
  double best = -std::numeric_limits<double>::infinity();
  double total_weight = 0.0;
  for (std::size_t k = 0; k < log_terms.size(); ++k) {
    if (weights[k] > 0.0) {
      best = std::max(best, log_terms[k]);
      total_weight += weights[k];
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < log_terms.size(); ++k) {
    if (weights[k] > 0.0) sum += weights[k] * std::exp(log_terms[k] - best);
  }
  return best + std::log(sum) - std::log(total_weight);
}

ScoreVector MakeScores(std::string_view name, std::size_t n) {
  ScoreVector out;
  out.attack = std::string(name);
  out.log_scores.resize(n);
  out.ids.resize(n);
  for (std::size_t r = 0; r < n; ++r) out.ids[r] = static_cast<std::int64_t>(r);
  return out;
}

std::vector<LogRatioTable> NodeRatios(const Dataset& synth, const Dataset& aux) {
  std::vector<LogRatioTable> nodes;
  for (std::size_t i = 0; i < synth.num_attributes(); ++i) nodes.emplace_back(synth, aux, AttrList{i});
  return nodes;
}

// Weighted average of per-term ratios; shared by MAMA-MIA and Hybrid scores.
template <typename Key>
ScoreVector WeightedRatioScores(std::string_view name, const Dataset& records,
                                const std::vector<std::pair<Key, double>>& weighted_keys,
                                const Dataset& synth, const Dataset& aux) {
  CheckInputs(records, synth, aux);
  std::vector<LogRatioTable> tables;
  std::vector<double> weights;
  for (const auto& [key, w] : weighted_keys) {
    if (!(w > 0.0)) continue;
    if constexpr (std::is_same_v<Key, Edge>) {
      tables.emplace_back(synth, aux, AttrList{key.first, key.second});
    } else {
      tables.emplace_back(synth, aux, key);
    }
    weights.push_back(w);
  }
  if (tables.empty()) throw Error(ErrorCode::kConfiguration, name.data() + std::string(": all weights are zero"));
  ScoreVector out = MakeScores(name, records.rows());
  std::vector<double> terms(tables.size());
  for (std::size_t r = 0; r < records.rows(); ++r) {
    const auto x = records.row(r);
    for (std::size_t k = 0; k < tables.size(); ++k) terms[k] = tables[k](x);
    out.log_scores[r] = LogWeightedMean(terms, weights);
  }
  return out;
}

}  // namespace

std::string_view AttackName(AttackKind kind) {
  switch (kind) {
    case AttackKind::kTamisMst: return "TAMIS-MST";
    case AttackKind::kMamaMiaMst: return "MAMAMIA-MST";
    case AttackKind::kHybridMst: return "Hybrid-MST";
    case AttackKind::kTamisMstAvg: return "TAMIS-MST-avg";
    case AttackKind::kMarginalsSigma: return "Marginals-Sigma";
    case AttackKind::kMarginalsPi: return "Marginals-Pi";
    case AttackKind::kTamisPb: return "TAMIS-PB";
    case AttackKind::kMamaMiaPb: return "MAMAMIA-PB";
    case AttackKind::kHybridPb: return "Hybrid-PB";
  }
  return "unknown";
}

AttackKind ParseAttack(std::string_view name) {
  for (AttackKind kind : AllAttacks()) {
    if (AttackName(kind) == name) return kind;
  }
  throw Error(ErrorCode::kConfiguration, "unknown attack '" + std::string(name) + "'");
}

Method AttackTarget(AttackKind kind) {
  switch (kind) {
    case AttackKind::kTamisPb:
    case AttackKind::kMamaMiaPb:
    case AttackKind::kHybridPb:
      return Method::kPrivBayes;
    default:
      return Method::kMst;
  }
}

std::vector<AttackKind> AllAttacks() {
  return {AttackKind::kTamisMst,       AttackKind::kMamaMiaMst,  AttackKind::kHybridMst,
          AttackKind::kTamisMstAvg,    AttackKind::kMarginalsSigma, AttackKind::kMarginalsPi,
          AttackKind::kTamisPb,        AttackKind::kMamaMiaPb,   AttackKind::kHybridPb};
}

double ScoreVector::Value(std::size_t i) const { return std::exp(log_scores[i]); }

std::vector<double> ScoreVector::Values() const {
  std::vector<double> out(log_scores.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_scores[i]);
  return out;
}

ScoreVector ScoreVector::FromValues(std::string attack, std::span<const double> values) {
  ScoreVector out = MakeScores(attack, values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw Error(ErrorCode::kParameter, "raw scores must be positive");
    out.log_scores[i] = std::log(values[i]);
  }
  return out;
}

ScoreVector TamisMst(const Dataset& records, std::span<const Edge> tree, const Dataset& synth,
                     const Dataset& aux) {
  CheckInputs(records, synth, aux);
  const std::size_t d = records.num_attributes();
  if (!IsSpanningTree(d, tree)) throw Error(ErrorCode::kConfiguration, "TAMIS-MST needs a spanning tree");
  const auto nodes = NodeRatios(synth, aux);
  std::vector<LogRatioTable> edges;
  std::vector<double> exponent(d, 1.0);
  for (const Edge& e : tree) {
    edges.emplace_back(synth, aux, AttrList{e.first, e.second});
    exponent[e.first] -= 1.0;
    exponent[e.second] -= 1.0;
  }
  ScoreVector out = MakeScores(AttackName(AttackKind::kTamisMst), records.rows());
  for (std::size_t r = 0; r < records.rows(); ++r) {
    const auto x = records.row(r);
    double log_score = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (exponent[i] != 0.0) log_score += exponent[i] * nodes[i](x);
    }
    for (const auto& table : edges) log_score += table(x);
    out.log_scores[r] = log_score;
  }
  return out;
}

ScoreVector TamisPb(const Dataset& records, std::span<const Family> network, const Dataset& synth,
                    const Dataset& aux) {
  CheckInputs(records, synth, aux);
  if (!IsTopologicalOrder(records.num_attributes(), network)) {
    throw Error(ErrorCode::kConfiguration, "TAMIS-PB needs a complete network in topological order");
  }
  std::vector<LogRatioTable> families;
  for (const Family& f : network) families.emplace_back(synth, aux, f);
  ScoreVector out = MakeScores(AttackName(AttackKind::kTamisPb), records.rows());
  for (std::size_t r = 0; r < records.rows(); ++r) {
    const auto x = records.row(r);
    double log_score = 0.0;
    for (const auto& table : families) log_score += table(x);
    out.log_scores[r] = log_score;
  }
  return out;
}

ScoreVector MamaMiaMst(const Dataset& records, const ShadowWeights& weights, const Dataset& synth,
                       const Dataset& aux) {
  if (weights.Total() == 0) throw Error(ErrorCode::kConfiguration, "MAMA-MIA needs nonzero weights");
  std::vector<std::pair<Edge, double>> keys;
  for (const auto& [e, w] : weights.edge_weights) keys.emplace_back(e, static_cast<double>(w));
  return WeightedRatioScores(AttackName(AttackKind::kMamaMiaMst), records, keys, synth, aux);
}

ScoreVector MamaMiaPb(const Dataset& records, const ShadowWeights& weights, const Dataset& synth,
                      const Dataset& aux) {
  if (weights.Total() == 0) throw Error(ErrorCode::kConfiguration, "MAMA-MIA needs nonzero weights");
  std::vector<std::pair<Family, double>> keys;
  for (const auto& [f, w] : weights.family_weights) keys.emplace_back(f, static_cast<double>(w));
  return WeightedRatioScores(AttackName(AttackKind::kMamaMiaPb), records, keys, synth, aux);
}

ScoreVector HybridMst(const Dataset& records, std::span<const Edge> tree, const Dataset& synth,
                      const Dataset& aux) {
  if (tree.empty()) throw Error(ErrorCode::kConfiguration, "Hybrid-MST needs at least one edge");
  std::vector<Edge> sorted(tree.begin(), tree.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<Edge, double>> keys;
  for (const Edge& e : sorted) keys.emplace_back(e, 1.0);
  return WeightedRatioScores(AttackName(AttackKind::kHybridMst), records, keys, synth, aux);
}

ScoreVector HybridPb(const Dataset& records, std::span<const Family> network, const Dataset& synth,
                     const Dataset& aux) {
  if (network.empty()) throw Error(ErrorCode::kConfiguration, "Hybrid-PB needs at least one family");
  std::vector<Family> sorted(network.begin(), network.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<Family, double>> keys;
  for (const Family& f : sorted) keys.emplace_back(f, 1.0);
  return WeightedRatioScores(AttackName(AttackKind::kHybridPb), records, keys, synth, aux);
}

ScoreVector TamisMstAvg(const Dataset& records, std::span<const Edge> tree, const Dataset& synth,
                        const Dataset& aux) {
  CheckInputs(records, synth, aux);
  const std::size_t d = records.num_attributes();
  const auto nodes = NodeRatios(synth, aux);
  std::vector<LogRatioTable> edges;
  for (const Edge& e : tree) edges.emplace_back(synth, aux, AttrList{e.first, e.second});
  ScoreVector out = MakeScores(AttackName(AttackKind::kTamisMstAvg), records.rows());
  std::vector<double> terms(d + tree.size());
  const std::vector<double> weights(terms.size(), 1.0);
  for (std::size_t r = 0; r < records.rows(); ++r) {
    const auto x = records.row(r);
    for (std::size_t i = 0; i < d; ++i) terms[i] = nodes[i](x);
    for (std::size_t k = 0; k < tree.size(); ++k) {
      terms[d + k] = edges[k](x) - terms[tree[k].first] - terms[tree[k].second];
    }
    out.log_scores[r] = LogWeightedMean(terms, weights);
  }
  return out;
}

ScoreVector MarginalsSigma(const Dataset& records, const Dataset& synth, const Dataset& aux) {
  CheckInputs(records, synth, aux);
  const std::size_t d = records.num_attributes();
  const auto nodes = NodeRatios(synth, aux);
  std::vector<LogRatioTable> pairs;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) pairs.emplace_back(synth, aux, AttrList{i, j});
  }
  ScoreVector out = MakeScores(AttackName(AttackKind::kMarginalsSigma), records.rows());
  std::vector<double> terms(d + pairs.size());
  const std::vector<double> weights(terms.size(), 1.0);
  for (std::size_t r = 0; r < records.rows(); ++r) {
    const auto x = records.row(r);
    for (std::size_t i = 0; i < d; ++i) terms[i] = nodes[i](x);
    std::size_t k = d;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j, ++k) {
        terms[k] = pairs[k - d](x) - terms[i] - terms[j];
      }
    }
    out.log_scores[r] = LogWeightedMean(terms, weights);
  }
  return out;
}

ScoreVector MarginalsPi(const Dataset& records, const Dataset& synth, const Dataset& aux) {
  CheckInputs(records, synth, aux);
  const std::size_t d = records.num_attributes();
  const auto nodes = NodeRatios(synth, aux);
  std::vector<LogRatioTable> pairs;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) pairs.emplace_back(synth, aux, AttrList{i, j});
  }
  const double log_prefactor = -std::log(static_cast<double>(d + pairs.size()));
  const double node_exponent = 2.0 - static_cast<double>(d);
  ScoreVector out = MakeScores(AttackName(AttackKind::kMarginalsPi), records.rows());
  for (std::size_t r = 0; r < records.rows(); ++r) {
    const auto x = records.row(r);
    double log_score = log_prefactor;
    for (std::size_t i = 0; i < d; ++i) log_score += node_exponent * nodes[i](x);
    for (const auto& table : pairs) log_score += table(x);
    out.log_scores[r] = log_score;
  }
  return out;
}

ScoreVector ScoreAttack(AttackKind kind, const AttackInputs& in) {
  if (!in.records || !in.synth || !in.aux) {
    throw Error(ErrorCode::kConfiguration, "attack inputs need records, synthetic and auxiliary data");
  }
  const auto need_weights = [&]() -> const ShadowWeights& {
    if (!in.weights) throw Error(ErrorCode::kConfiguration, "attack needs shadow weights");
    return *in.weights;
  };
  switch (kind) {
    case AttackKind::kTamisMst: return TamisMst(*in.records, in.tree, *in.synth, *in.aux);
    case AttackKind::kMamaMiaMst: return MamaMiaMst(*in.records, need_weights(), *in.synth, *in.aux);
    case AttackKind::kHybridMst: return HybridMst(*in.records, in.tree, *in.synth, *in.aux);
    case AttackKind::kTamisMstAvg: return TamisMstAvg(*in.records, in.tree, *in.synth, *in.aux);
    case AttackKind::kMarginalsSigma: return MarginalsSigma(*in.records, *in.synth, *in.aux);
    case AttackKind::kMarginalsPi: return MarginalsPi(*in.records, *in.synth, *in.aux);
    case AttackKind::kTamisPb: return TamisPb(*in.records, in.network, *in.synth, *in.aux);
    case AttackKind::kMamaMiaPb: return MamaMiaPb(*in.records, need_weights(), *in.synth, *in.aux);
    case AttackKind::kHybridPb: return HybridPb(*in.records, in.network, *in.synth, *in.aux);
  }
  throw Error(ErrorCode::kConfiguration, "unknown attack");
}

ScoreVector AggregateHouseholds(const ScoreVector& scores, std::span<const HouseholdId> households) {
  if (households.size() != scores.size()) {
    throw Error(ErrorCode::kConfiguration, "household ids do not match the score count");
  }
  std::map<HouseholdId, std::vector<double>> groups;
  for (std::size_t r = 0; r < scores.size(); ++r) groups[households[r]].push_back(scores.log_scores[r]);
  ScoreVector out;
  out.attack = scores.attack;
  for (const auto& [id, logs] : groups) {
    const std::vector<double> weights(logs.size(), 1.0);
    out.ids.push_back(id);
    out.log_scores.push_back(logs.size() == 1 ? logs[0] : LogWeightedMean(logs, weights));
  }
  return out;
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kParameter, "quantile of an empty vector");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::kParameter, "quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Activation ActivateSimple(const ScoreVector& scores, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kParameter, "activation threshold must lie in [0, 1]");
  }
  Activation out;
  out.probabilities.resize(scores.size());
  out.predictions.resize(scores.size());
  // 2 Sigmoid(L) - 1 >= t  <=>  L >= log((1 + t) / (1 - t)); compare logs so
  // the boundary is exact.
  const bool interior = threshold > 0.0 && threshold < 1.0;
  const double log_cut = interior ? std::log(std::log((1.0 + threshold) / (1.0 - threshold))) : 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double lambda = scores.Value(i);
    out.probabilities[i] = std::tanh(0.5 * lambda);
    out.predictions[i] = interior ? scores.log_scores[i] >= log_cut : out.probabilities[i] >= threshold;
  }
  return out;
}

Activation ActivateCalibrated(const ScoreVector& scores, double prior) {
  if (!(prior > 0.0 && prior < 1.0)) throw Error(ErrorCode::kParameter, "prior must lie in (0, 1)");
  const std::size_t n = scores.size();
  Activation out;
  out.probabilities.assign(n, 0.0);
  out.predictions.assign(n, 0);
  if (n == 0) return out;
  std::vector<double> z(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = std::exp(std::min(scores.log_scores[i], 600.0));
    mean += z[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    out.degenerate = true;
    return out;
  }
  for (double& v : z) v = (v - mean) / sd;
  const double center = Quantile(z, 1.0 - prior);
  for (std::size_t i = 0; i < n; ++i) {
    const double shifted = z[i] - center;
    out.probabilities[i] = 1.0 / (1.0 + std::exp(-shifted));
    out.predictions[i] = shifted >= 0.0;
  }
  return out;
}

Activation Activate(const ScoreVector& scores, const ActivationConfig& cfg) {
  if (cfg.regime == ActivationRegime::kSimple) return ActivateSimple(scores, cfg.threshold);
  if (!cfg.prior) throw Error(ErrorCode::kParameter, "calibrated activation needs a prior");
  return ActivateCalibrated(scores, *cfg.prior);
}

std::string FormatScoresCsv(const ScoreVector& scores, const Activation& activation,
                            std::span<const HouseholdId> households,
                            std::span<const std::uint8_t> labels) {
  std::string out = "record_id,household_id,raw_score,probability,prediction,label\n";
  char buffer[160];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::string hh = i < households.size() ? std::to_string(households[i]) : "";
    const std::string label = i < labels.size() ? std::to_string(static_cast<int>(labels[i])) : "";
    std::snprintf(buffer, sizeof(buffer), "%lld,%s,%.17g,%.17g,%d,%s\n",
                  static_cast<long long>(scores.ids[i]), hh.c_str(), scores.Value(i),
                  activation.probabilities[i], static_cast<int>(activation.predictions[i]),
                  label.c_str());
    out += buffer;
  }
  return out;
}

}  // namespace tamis
