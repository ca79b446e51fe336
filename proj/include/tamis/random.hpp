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

#ifndef TAMIS_RANDOM_HPP_
#define TAMIS_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tamis {

// Mixes a master seed with a stream index (splitmix64 finalizer). Used to give
// each replica, shadow run or pipeline stage an independent seed.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t index);

// Seeded generator. The engine output sequence is fixed by the standard and
// every transform below is implemented here, so draws are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();

  // Uniform in (0, 1).
  double UniformOpen();

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t Below(std::uint64_t n);

  double Laplace(double scale);
  double Gaussian();

  // Index drawn from an unnormalized cumulative weight table.
  std::size_t FromCumulative(std::span<const double> cumulative);

  // Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_gaussian_ = false;
  double spare_gaussian_ = 0.0;
};

}  // namespace tamis

#endif  // TAMIS_RANDOM_HPP_
