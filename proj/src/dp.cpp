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

#include "tamis/dp.hpp"

#include <algorithm>
#include <cmath>

#include "tamis/error.hpp"

namespace tamis {
namespace {

constexpr double kShareSlack = 1e-9;

nlohmann::json EpsilonToJson(double epsilon) {
  if (epsilon == kInfiniteEpsilon) return "inf";
  return epsilon;
}

double EpsilonFromJson(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInfiniteEpsilon;
    throw Error(ErrorCode::kParse, "epsilon must be a number or \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

void DpParams::Validate() const {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kParameter, "epsilon must be positive");
  if (!(delta >= 0.0 && delta < 1.0)) throw Error(ErrorCode::kParameter, "delta must lie in [0, 1)");
  if (!(theta > 0.0)) throw Error(ErrorCode::kParameter, "theta must be positive");
}

std::vector<double> LaplaceNoise(double scale, std::size_t n, std::uint64_t seed) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kParameter, "Laplace scale must be positive and finite");
  }
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = rng.Laplace(scale);
  return out;
}

std::vector<double> GaussianNoise(double sigma, std::size_t n, std::uint64_t seed) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kParameter, "Gaussian sigma must be positive and finite");
  }
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = sigma * rng.Gaussian();
  return out;
}

std::size_t ExponentialMechanism(std::span<const double> scores, double epsilon,
                                 double sensitivity, Rng& rng) {
  if (scores.empty()) throw Error(ErrorCode::kSelection, "no candidate to select from");
  if (!(sensitivity > 0.0)) throw Error(ErrorCode::kParameter, "sensitivity must be positive");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kParameter, "epsilon must be positive");
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kSelection, "candidate scores must be finite");
  }
  const auto best = std::max_element(scores.begin(), scores.end());
  if (epsilon == kInfiniteEpsilon) return static_cast<std::size_t>(best - scores.begin());

  const double factor = epsilon / (2.0 * sensitivity);
  std::vector<double> cumulative(scores.size());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    total += std::exp(factor * (scores[k] - *best));
    cumulative[k] = total;
  }
  return rng.FromCumulative(cumulative);
}

std::size_t ExponentialMechanism(std::span<const double> scores, double epsilon,
                                 double sensitivity, std::uint64_t seed) {
  Rng rng(seed);
  return ExponentialMechanism(scores, epsilon, sensitivity, rng);
}

double ZcdpRho(double epsilon, double delta) {
  if (epsilon == kInfiniteEpsilon) return kInfiniteEpsilon;
  if (!(delta > 0.0)) throw Error(ErrorCode::kParameter, "zCDP conversion needs delta > 0");
  // Smallest rho with rho + 2 sqrt(rho log(1/delta)) >= epsilon.
  const double log_inv = std::log(1.0 / delta);
  const double root = std::sqrt(log_inv + epsilon) - std::sqrt(log_inv);
  return root * root;
}

double GaussianSigmaForRho(double rho, double l2_sensitivity) {
  if (!(rho > 0.0)) throw Error(ErrorCode::kParameter, "rho must be positive");
  return l2_sensitivity / std::sqrt(2.0 * rho);
}

double ExponentialEpsilonForRho(double rho) {
  if (!(rho > 0.0)) throw Error(ErrorCode::kParameter, "rho must be positive");
  return std::sqrt(8.0 * rho);
}

void BudgetLedger::Spend(std::string label, double epsilon_share, double delta_share,
                         std::string mechanism) {
  if (epsilon_share < 0.0 || delta_share < 0.0) {
    throw Error(ErrorCode::kBudget, "negative budget share for '" + label + "'");
  }
  if (epsilon_spent_ + epsilon_share > 1.0 + kShareSlack ||
      delta_spent_ + delta_share > 1.0 + kShareSlack) {
    throw Error(ErrorCode::kBudget, "budget exhausted at '" + label + "'");
  }
  epsilon_spent_ += epsilon_share;
  delta_spent_ += delta_share;
  entries_.push_back({std::move(label), epsilon_share, delta_share, std::move(mechanism)});
}

nlohmann::json BudgetLedger::ToJson() const {
  nlohmann::json spent = nlohmann::json::array();
  for (const auto& e : entries_) {
    spent.push_back({{"label", e.label},
                     {"epsilon_share", e.epsilon_share},
                     {"delta_share", e.delta_share},
                     {"mechanism", e.mechanism}});
  }
  return {{"total", DpParamsToJson(total_)}, {"spent", spent}};
}

BudgetLedger BudgetLedger::FromJson(const nlohmann::json& j) {
  BudgetLedger ledger(DpParamsFromJson(j.at("total")));
  for (const auto& e : j.at("spent")) {
    ledger.Spend(e.at("label").get<std::string>(), e.at("epsilon_share").get<double>(),
                 e.at("delta_share").get<double>(), e.at("mechanism").get<std::string>());
  }
  return ledger;
}

nlohmann::json DpParamsToJson(const DpParams& dp) {
  return {{"epsilon", EpsilonToJson(dp.epsilon)},
          {"delta", dp.delta},
          {"theta", dp.theta},
          {"seed", dp.seed}};
}

DpParams DpParamsFromJson(const nlohmann::json& j) {
  DpParams dp;
  if (j.contains("epsilon")) dp.epsilon = EpsilonFromJson(j.at("epsilon"));
  if (j.contains("delta")) dp.delta = j.at("delta").get<double>();
  if (j.contains("theta")) dp.theta = j.at("theta").get<double>();
  if (j.contains("seed")) dp.seed = j.at("seed").get<std::uint64_t>();
  dp.Validate();
  return dp;
}

}  // namespace tamis
