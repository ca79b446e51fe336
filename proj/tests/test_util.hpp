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

#ifndef TAMIS_TESTS_TEST_UTIL_HPP_
#define TAMIS_TESTS_TEST_UTIL_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "tamis/data.hpp"
#include "tamis/population.hpp"
#include "tamis/random.hpp"
#include "tamis/sdg.hpp"

namespace tamis::testing {

inline std::vector<std::size_t> RandomCardinalities(Rng& rng, std::size_t d, std::size_t lo,
                                                    std::size_t hi) {
  std::vector<std::size_t> cards(d);
  for (auto& c : cards) c = lo + rng.Below(hi - lo + 1);
  return cards;
}

// Records drawn from a random tree model, so attributes are dependent.
inline Dataset RandomDataset(Rng& rng, std::span<const std::size_t> cards, std::size_t rows,
                             double concentration = 1.0) {
  const Domain domain = Domain::FromCardinalities(cards);
  const TreeModel model = RandomTreeModel(domain, concentration, rng);
  return SampleTree(model, rows, rng.NextU64());
}

// Calls fn on every record of the domain, last attribute fastest.
inline void ForEachRecord(const Domain& domain, const std::function<void(std::span<const Value>)>& fn) {
  const std::size_t d = domain.size();
  std::vector<Value> x(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    if (domain.cardinality(i) == 0) return;
  }
  while (true) {
    fn(x);
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++x[k] < domain.cardinality(k)) break;
      x[k] = 0;
      if (k == 0) return;
    }
    if (d == 0) return;
  }
}

// Fraction of rows whose projection on attrs equals values.
inline double CountFraction(const Dataset& ds, const AttrList& attrs, const std::vector<Value>& values) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    bool match = true;
    for (std::size_t k = 0; k < attrs.size(); ++k) match = match && ds.at(r, attrs[k]) == values[k];
    hits += match;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.rows());
}

// Every labelled spanning tree of the complete graph on n nodes, by subset
// enumeration of n-1 edges out of all pairs.
inline std::vector<std::vector<Edge>> AllSpanningTrees(std::size_t n) {
  std::vector<Edge> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j});
  }
  std::vector<std::vector<Edge>> trees;
  const std::size_t m = pairs.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) + 1 != n) continue;
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < m; ++k) {
      if (mask >> k & 1) edges.push_back(pairs[k]);
    }
    if (IsSpanningTree(n, edges)) trees.push_back(edges);
  }
  return trees;
}

}  // namespace tamis::testing

#endif  // TAMIS_TESTS_TEST_UTIL_HPP_
