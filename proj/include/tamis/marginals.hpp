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

#ifndef TAMIS_MARGINALS_HPP_
#define TAMIS_MARGINALS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "tamis/data.hpp"

namespace tamis {

// Dense probability table over the attributes `attrs`, laid out row-major with
// the last attribute varying fastest.
class MarginalTable {
 public:
  MarginalTable() = default;
  MarginalTable(AttrList attrs, std::vector<std::size_t> shape, std::vector<double> probs,
                std::size_t source_size);

  const AttrList& attrs() const { return attrs_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t source_size() const { return source_size_; }
  std::size_t cells() const { return probs_.size(); }

  // Cell index of the projection of a full record onto `attrs`.
  std::size_t IndexOf(std::span<const Value> record) const;
  // Cell index from values listed in `attrs` order.
  std::size_t IndexOfProjection(std::span<const Value> values) const;

  double Lookup(std::span<const Value> record) const { return probs_[IndexOf(record)]; }
  double at(std::size_t cell) const { return probs_[cell]; }

  // Mixes every cell with the uniform distribution so that each cell is at
  // least `floor` and the table still sums to one. The effective floor is
  // capped at half the uniform mass.
  MarginalTable Floored(double floor) const;

  // Sum out every attribute not in `keep`; `keep` must be a subsequence of
  // attrs() and its order is preserved.
  MarginalTable SumTo(const AttrList& keep) const;

 private:
  AttrList attrs_;
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> probs_;
  std::size_t source_size_ = 0;
};

// P(child | parents). One distribution of size n_child per parent
// configuration, configurations ordered row-major over `parents`.
class ConditionalTable {
 public:
  ConditionalTable() = default;
  ConditionalTable(AttrIndex child, AttrList parents, std::vector<std::size_t> parent_shape,
                   std::size_t child_cardinality, std::vector<double> probs,
                   std::size_t source_size);

  AttrIndex child() const { return child_; }
  const AttrList& parents() const { return parents_; }
  const std::vector<std::size_t>& parent_shape() const { return parent_shape_; }
  std::size_t child_cardinality() const { return child_cardinality_; }
  std::size_t parent_configurations() const;
  const std::vector<double>& probs() const { return probs_; }
  std::size_t source_size() const { return source_size_; }

  std::size_t ParentIndex(std::span<const Value> record) const;
  std::span<const double> Distribution(std::size_t parent_config) const {
    return {probs_.data() + parent_config * child_cardinality_, child_cardinality_};
  }
  double Lookup(std::span<const Value> record) const;

 private:
  AttrIndex child_ = 0;
  AttrList parents_;
  std::vector<std::size_t> parent_shape_;
  std::vector<std::size_t> parent_strides_;
  std::size_t child_cardinality_ = 0;
  std::vector<double> probs_;
  std::size_t source_size_ = 0;
};

// Default floor for a table estimated from `source_size` rows: 1/(10 n).
double DefaultFloor(std::size_t source_size);

// Integer contingency counts over `attrs` (row-major, last attribute fastest).
std::vector<std::uint64_t> CountTable(const Dataset& ds, const AttrList& attrs);

// Empirical joint distribution of `attrs`. Throws an estimation error on an
// empty dataset.
MarginalTable Marginal(const Dataset& ds, const AttrList& attrs);

// Turns a (possibly noisy, unnormalized, nonnegative) joint table over
// (parents..., child) into a conditional. Blocks of zero mass become uniform;
// a positive floor is then applied per block.
ConditionalTable ConditionalFromJoint(AttrIndex child, const AttrList& parents,
                                      std::span<const std::size_t> parent_shape,
                                      std::size_t child_cardinality,
                                      std::span<const double> joint, double floor,
                                      std::size_t source_size);

// Empirical conditional P(child | parents), floored per parent configuration.
ConditionalTable Conditional(const Dataset& ds, AttrIndex child, const AttrList& parents,
                             double floor);

nlohmann::json TableToJson(const MarginalTable& table);
MarginalTable TableFromJson(const nlohmann::json& j);
nlohmann::json TableToJson(const ConditionalTable& table);
ConditionalTable ConditionalFromJson(const nlohmann::json& j);

}  // namespace tamis

#endif  // TAMIS_MARGINALS_HPP_
