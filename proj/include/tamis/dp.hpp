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

#ifndef TAMIS_DP_HPP_
#define TAMIS_DP_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tamis/random.hpp"

namespace tamis {

// Sentinel privacy budget that switches every mechanism to its noiseless limit.
inline constexpr double kInfiniteEpsilon = std::numeric_limits<double>::infinity();

struct DpParams {
  double epsilon = 1.0;
  double delta = 1e-9;
  // PrivBayes usefulness parameter: a (node, parents) candidate is admissible
  // iff its joint domain size is at most theta * epsilon * |train|.
  double theta = 4e-4;
  std::uint64_t seed = 0;

  bool noiseless() const { return epsilon == kInfiniteEpsilon; }
  void Validate() const;
};

std::vector<double> LaplaceNoise(double scale, std::size_t n, std::uint64_t seed);
std::vector<double> GaussianNoise(double sigma, std::size_t n, std::uint64_t seed);

// Draws index k with probability proportional to
// exp(epsilon * scores[k] / (2 * sensitivity)). An infinite epsilon returns the
// first maximal index.
std::size_t ExponentialMechanism(std::span<const double> scores, double epsilon,
                                 double sensitivity, Rng& rng);
std::size_t ExponentialMechanism(std::span<const double> scores, double epsilon,
                                 double sensitivity, std::uint64_t seed);

// zCDP parameter rho implied by (epsilon, delta).
double ZcdpRho(double epsilon, double delta);
// Gaussian noise scale giving rho-zCDP for a query of the given L2 sensitivity.
double GaussianSigmaForRho(double rho, double l2_sensitivity);
// Pure-DP epsilon of an exponential mechanism charged rho under zCDP.
double ExponentialEpsilonForRho(double rho);

// Records the share of the total budget consumed by each mechanism call.
class BudgetLedger {
 public:
  struct Entry {
    std::string label;
    double epsilon_share = 0.0;
    double delta_share = 0.0;
    std::string mechanism;
  };

  BudgetLedger() = default;
  explicit BudgetLedger(DpParams total) : total_(total) {}

  // Throws a budget error when a share would push a component past 1.
  void Spend(std::string label, double epsilon_share, double delta_share, std::string mechanism);

  const DpParams& total() const { return total_; }
  const std::vector<Entry>& entries() const { return entries_; }
  double epsilon_spent() const { return epsilon_spent_; }
  double delta_spent() const { return delta_spent_; }

  nlohmann::json ToJson() const;
  static BudgetLedger FromJson(const nlohmann::json& j);

 private:
  DpParams total_;
  std::vector<Entry> entries_;
  double epsilon_spent_ = 0.0;
  double delta_spent_ = 0.0;
};

nlohmann::json DpParamsToJson(const DpParams& dp);
DpParams DpParamsFromJson(const nlohmann::json& j);

}  // namespace tamis

#endif  // TAMIS_DP_HPP_
