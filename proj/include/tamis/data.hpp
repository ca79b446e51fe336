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

#ifndef TAMIS_DATA_HPP_
#define TAMIS_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace tamis {

using Value = std::uint32_t;
using AttrIndex = std::size_t;
using AttrList = std::vector<AttrIndex>;
using HouseholdId = std::int64_t;

struct Attribute {
  std::string name;
  // Category labels; label k decodes index k.
  std::vector<std::string> categories;

  std::size_t cardinality() const { return categories.size(); }
  bool operator==(const Attribute&) const = default;
};

// Ordered list of categorical attributes X_i with values in [0, n_i).
class Domain {
 public:
  Domain() = default;
  explicit Domain(std::vector<Attribute> attributes);

  // Categories are labelled "0", "1", ... ; names default to "x0", "x1", ...
  static Domain FromCardinalities(std::span<const std::size_t> cardinalities,
                                  std::span<const std::string> names = {});

  std::size_t size() const { return attributes_.size(); }
  const Attribute& attribute(AttrIndex i) const { return attributes_.at(i); }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::size_t cardinality(AttrIndex i) const { return attributes_.at(i).cardinality(); }
  std::vector<std::size_t> cardinalities() const;
  std::optional<AttrIndex> IndexOf(std::string_view name) const;

  // Natural log of the full domain size; never overflows.
  double LogSize() const;

  // Number of cells of the sub-domain spanned by `attrs`. Throws a
  // configuration error past `limit`.
  std::size_t Cells(std::span<const AttrIndex> attrs,
                    std::size_t limit = kMaxDenseCells) const;

  std::optional<Value> Encode(AttrIndex i, std::string_view label) const;
  const std::string& Decode(AttrIndex i, Value v) const;

  bool operator==(const Domain&) const = default;

  // Guard on dense table sizes.
  static constexpr std::size_t kMaxDenseCells = 100'000'000;

 private:
  std::vector<Attribute> attributes_;
};

// Encoded categorical records, row-major. Immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Domain domain, std::vector<Value> cells,
          std::optional<std::vector<HouseholdId>> households = std::nullopt,
          std::optional<std::vector<std::uint8_t>> membership = std::nullopt);

  const Domain& domain() const { return domain_; }
  std::size_t rows() const { return rows_; }
  std::size_t num_attributes() const { return domain_.size(); }
  bool empty() const { return rows_ == 0; }

  Value at(std::size_t row, AttrIndex attr) const { return cells_[row * domain_.size() + attr]; }
  std::span<const Value> row(std::size_t r) const {
    return {cells_.data() + r * domain_.size(), domain_.size()};
  }
  std::span<const Value> cells() const { return cells_; }

  const std::optional<std::vector<HouseholdId>>& households() const { return households_; }
  const std::optional<std::vector<std::uint8_t>>& membership() const { return membership_; }

  // Rows in the given order, carrying household ids and labels along.
  Dataset Select(std::span<const std::size_t> rows) const;
  Dataset WithMembership(std::vector<std::uint8_t> labels) const;

 private:
  Domain domain_;
  std::size_t rows_ = 0;
  std::vector<Value> cells_;
  std::optional<std::vector<HouseholdId>> households_;
  std::optional<std::vector<std::uint8_t>> membership_;
};

// Reserved CSV columns.
inline constexpr std::string_view kHouseholdColumn = "__household__";
inline constexpr std::string_view kMemberColumn = "__member__";

// Reads an RFC-4180 CSV whose header names the attributes. Without a schema
// categories are numbered in order of first appearance per column.
Dataset LoadCsv(const std::filesystem::path& path,
                const std::optional<Domain>& schema = std::nullopt);
Dataset ParseCsv(std::string_view text, const std::optional<Domain>& schema = std::nullopt);
// Union of the categories of several datasets, attribute order of the first.
// Attributes are matched by name.
Domain MergeDomains(std::span<const Dataset> parts);

void WriteCsv(const Dataset& ds, const std::filesystem::path& path);
std::string FormatCsv(const Dataset& ds);

nlohmann::json DomainToJson(const Domain& domain);
Domain DomainFromJson(const nlohmann::json& j);

struct SplitSpec {
  std::size_t n_target_households = 100;
  std::size_t min_household_size = 5;
  std::size_t train_size = 10'000;
  double member_fraction_of_households = 0.5;
  std::uint64_t seed = 0;
};

struct SnakeSplit {
  Dataset train;
  Dataset target;
  // Membership bit per target row.
  std::vector<std::uint8_t> labels;
  // Row indices into aux.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> target_rows;
  std::vector<HouseholdId> target_households;
  std::vector<HouseholdId> member_households;
};

// Picks target households of at least the minimum size, includes a fraction of
// them in full in train and pads train with other aux individuals.
SnakeSplit MakeSnakeSplit(const Dataset& aux, const SplitSpec& opt);

// Per-aux-row membership bit for a split (1 iff the row was put in train).
std::vector<std::uint8_t> AuxMembership(const Dataset& aux, const SnakeSplit& split);

}  // namespace tamis

#endif  // TAMIS_DATA_HPP_
