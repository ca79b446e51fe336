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

#include "tamis/marginals.hpp"

#include <algorithm>
#include <numeric>

#include "tamis/error.hpp"

namespace tamis {
namespace {

std::vector<std::size_t> RowMajorStrides(std::span<const std::size_t> shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t k = shape.size(); k > 1; --k) strides[k - 2] = strides[k - 1] * shape[k - 1];
  return strides;
}

std::size_t Product(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

// Floor by mixing with uniform: q = f + (1 - n f) p.
void FloorBlock(std::span<double> block, double floor) {
  if (floor <= 0.0 || block.empty()) return;
  const double n = static_cast<double>(block.size());
  const double f = std::min(floor, 0.5 / n);
  const double keep = 1.0 - n * f;
  for (double& p : block) p = f + keep * p;
}

}  // namespace

double DefaultFloor(std::size_t source_size) {
  return 1.0 / (10.0 * static_cast<double>(std::max<std::size_t>(source_size, 1)));
}

MarginalTable::MarginalTable(AttrList attrs, std::vector<std::size_t> shape,
                             std::vector<double> probs, std::size_t source_size)
    : attrs_(std::move(attrs)),
      shape_(std::move(shape)),
      probs_(std::move(probs)),
      source_size_(source_size) {
  if (attrs_.size() != shape_.size() || Product(shape_) != probs_.size()) {
    throw Error(ErrorCode::kConfiguration, "marginal table shape does not match its contents");
  }
  strides_ = RowMajorStrides(shape_);
}

std::size_t MarginalTable::IndexOf(std::span<const Value> record) const {
  std::size_t index = 0;
  for (std::size_t k = 0; k < attrs_.size(); ++k) {
    const AttrIndex a = attrs_[k];
    if (a >= record.size() || record[a] >= shape_[k]) {
      throw Error(ErrorCode::kBounds, "record is outside the table domain");
    }
    index += record[a] * strides_[k];
  }
  return index;
}

std::size_t MarginalTable::IndexOfProjection(std::span<const Value> values) const {
  std::size_t index = 0;
  for (std::size_t k = 0; k < attrs_.size(); ++k) {
    if (values[k] >= shape_[k]) throw Error(ErrorCode::kBounds, "value outside the table domain");
    index += values[k] * strides_[k];
  }
  return index;
}

MarginalTable MarginalTable::Floored(double floor) const {
  MarginalTable out = *this;
  FloorBlock(out.probs_, floor);
  return out;
}

MarginalTable MarginalTable::SumTo(const AttrList& keep) const {
  std::vector<std::size_t> positions;
  std::size_t next = 0;
  for (AttrIndex a : keep) {
    while (next < attrs_.size() && attrs_[next] != a) ++next;
    if (next == attrs_.size()) {
      throw Error(ErrorCode::kConfiguration, "SumTo: attributes are not a subsequence of the table");
    }
    positions.push_back(next++);
  }
  std::vector<std::size_t> shape;
  for (auto p : positions) shape.push_back(shape_[p]);
  const auto out_strides = RowMajorStrides(shape);
  std::vector<double> probs(Product(shape), 0.0);
  std::vector<std::size_t> coord(attrs_.size(), 0);
  for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
    std::size_t target = 0;
    for (std::size_t k = 0; k < positions.size(); ++k) target += coord[positions[k]] * out_strides[k];
    probs[target] += probs_[cell];
    for (std::size_t k = attrs_.size(); k-- > 0;) {
      if (++coord[k] < shape_[k]) break;
      coord[k] = 0;
    }
  }
  return MarginalTable(keep, std::move(shape), std::move(probs), source_size_);
}

ConditionalTable::ConditionalTable(AttrIndex child, AttrList parents,
                                   std::vector<std::size_t> parent_shape,
                                   std::size_t child_cardinality, std::vector<double> probs,
                                   std::size_t source_size)
    : child_(child),
      parents_(std::move(parents)),
      parent_shape_(std::move(parent_shape)),
      child_cardinality_(child_cardinality),
      probs_(std::move(probs)),
      source_size_(source_size) {
  if (parents_.size() != parent_shape_.size() ||
      Product(parent_shape_) * child_cardinality_ != probs_.size()) {
    throw Error(ErrorCode::kConfiguration, "conditional table shape does not match its contents");
  }
  parent_strides_ = RowMajorStrides(parent_shape_);
}

std::size_t ConditionalTable::parent_configurations() const { return Product(parent_shape_); }

std::size_t ConditionalTable::ParentIndex(std::span<const Value> record) const {
  std::size_t index = 0;
  for (std::size_t k = 0; k < parents_.size(); ++k) {
    const AttrIndex a = parents_[k];
    if (a >= record.size() || record[a] >= parent_shape_[k]) {
      throw Error(ErrorCode::kBounds, "record is outside the table domain");
    }
    index += record[a] * parent_strides_[k];
  }
  return index;
}

double ConditionalTable::Lookup(std::span<const Value> record) const {
  if (child_ >= record.size() || record[child_] >= child_cardinality_) {
    throw Error(ErrorCode::kBounds, "record is outside the table domain");
  }
  return probs_[ParentIndex(record) * child_cardinality_ + record[child_]];
}

std::vector<std::uint64_t> CountTable(const Dataset& ds, const AttrList& attrs) {
  const Domain& domain = ds.domain();
  std::vector<bool> seen(domain.size(), false);
  for (AttrIndex a : attrs) {
    if (a >= domain.size()) throw Error(ErrorCode::kBounds, "attribute index out of range");
    if (seen[a]) throw Error(ErrorCode::kConfiguration, "repeated attribute in marginal");
    seen[a] = true;
  }
  const std::size_t cells = domain.Cells(attrs);
  std::vector<std::size_t> shape;
  for (AttrIndex a : attrs) shape.push_back(domain.cardinality(a));
  const auto strides = RowMajorStrides(shape);
  std::vector<std::uint64_t> counts(cells, 0);
  const std::size_t d = domain.size();
  const auto all = ds.cells();
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const Value* row = all.data() + r * d;
    std::size_t index = 0;
    for (std::size_t k = 0; k < attrs.size(); ++k) index += row[attrs[k]] * strides[k];
    ++counts[index];
  }
  return counts;
}

MarginalTable Marginal(const Dataset& ds, const AttrList& attrs) {
  if (ds.empty()) throw Error(ErrorCode::kEstimation, "cannot estimate a marginal from 0 rows");
  const auto counts = CountTable(ds, attrs);
  std::vector<std::size_t> shape;
  for (AttrIndex a : attrs) shape.push_back(ds.domain().cardinality(a));
  const double n = static_cast<double>(ds.rows());
  std::vector<double> probs(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) probs[k] = static_cast<double>(counts[k]) / n;
  return MarginalTable(attrs, std::move(shape), std::move(probs), ds.rows());
}

ConditionalTable ConditionalFromJoint(AttrIndex child, const AttrList& parents,
                                      std::span<const std::size_t> parent_shape,
                                      std::size_t child_cardinality,
                                      std::span<const double> joint, double floor,
                                      std::size_t source_size) {
  std::vector<double> probs(joint.begin(), joint.end());
  const std::size_t configs = Product(parent_shape);
  if (configs * child_cardinality != probs.size()) {
    throw Error(ErrorCode::kConfiguration, "joint table size does not match the conditional shape");
  }
  for (std::size_t c = 0; c < configs; ++c) {
    std::span<double> block(probs.data() + c * child_cardinality, child_cardinality);
    double mass = 0.0;
    for (double& p : block) {
      if (!(p > 0.0)) p = 0.0;
      mass += p;
    }
    if (mass > 0.0) {
      for (double& p : block) p /= mass;
    } else {
      std::fill(block.begin(), block.end(), 1.0 / static_cast<double>(child_cardinality));
    }
    FloorBlock(block, floor);
  }
  return ConditionalTable(child, parents,
                          std::vector<std::size_t>(parent_shape.begin(), parent_shape.end()),
                          child_cardinality, std::move(probs), source_size);
}

ConditionalTable Conditional(const Dataset& ds, AttrIndex child, const AttrList& parents,
                             double floor) {
  if (std::find(parents.begin(), parents.end(), child) != parents.end()) {
    throw Error(ErrorCode::kConfiguration, "child attribute listed among its parents");
  }
  AttrList family = parents;
  family.push_back(child);
  const MarginalTable joint = Marginal(ds, family);
  std::vector<std::size_t> parent_shape(joint.shape().begin(), joint.shape().end() - 1);
  return ConditionalFromJoint(child, parents, parent_shape, ds.domain().cardinality(child),
                              joint.probs(), floor, ds.rows());
}

nlohmann::json TableToJson(const MarginalTable& table) {
  return {{"attrs", table.attrs()},
          {"shape", table.shape()},
          {"probs", table.probs()},
          {"source_size", table.source_size()}};
}

MarginalTable TableFromJson(const nlohmann::json& j) {
  return MarginalTable(j.at("attrs").get<AttrList>(), j.at("shape").get<std::vector<std::size_t>>(),
                       j.at("probs").get<std::vector<double>>(), j.at("source_size").get<std::size_t>());
}

nlohmann::json TableToJson(const ConditionalTable& table) {
  return {{"child", table.child()},
          {"parents", table.parents()},
          {"parent_shape", table.parent_shape()},
          {"child_cardinality", table.child_cardinality()},
          {"probs", table.probs()},
          {"source_size", table.source_size()}};
}

ConditionalTable ConditionalFromJson(const nlohmann::json& j) {
  return ConditionalTable(j.at("child").get<AttrIndex>(), j.at("parents").get<AttrList>(),
                          j.at("parent_shape").get<std::vector<std::size_t>>(),
                          j.at("child_cardinality").get<std::size_t>(),
                          j.at("probs").get<std::vector<double>>(),
                          j.at("source_size").get<std::size_t>());
}

}  // namespace tamis
