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

#include "tamis/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tamis/error.hpp"
#include "tamis/random.hpp"

namespace tamis {

Domain::Domain(std::vector<Attribute> attributes) : attributes_(std::move(attributes)) {
  std::set<std::string_view> names;
  for (const auto& a : attributes_) {
    if (!names.insert(a.name).second) {
      throw Error(ErrorCode::kConfiguration, "duplicate attribute name '" + a.name + "'");
    }
  }
}

Domain Domain::FromCardinalities(std::span<const std::size_t> cardinalities,
                                 std::span<const std::string> names) {
  if (!names.empty() && names.size() != cardinalities.size()) {
    throw Error(ErrorCode::kConfiguration, "names and cardinalities differ in length");
  }
  std::vector<Attribute> attrs;
  attrs.reserve(cardinalities.size());
  for (std::size_t i = 0; i < cardinalities.size(); ++i) {
    Attribute a;
    a.name = names.empty() ? "x" + std::to_string(i) : names[i];
    for (std::size_t v = 0; v < cardinalities[i]; ++v) a.categories.push_back(std::to_string(v));
    attrs.push_back(std::move(a));
  }
  return Domain(std::move(attrs));
}

std::vector<std::size_t> Domain::cardinalities() const {
  std::vector<std::size_t> out;
  out.reserve(attributes_.size());
  for (const auto& a : attributes_) out.push_back(a.cardinality());
  return out;
}

std::optional<AttrIndex> Domain::IndexOf(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

double Domain::LogSize() const {
  double total = 0.0;
  for (const auto& a : attributes_) total += std::log(static_cast<double>(a.cardinality()));
  return total;
}

std::size_t Domain::Cells(std::span<const AttrIndex> attrs, std::size_t limit) const {
  std::size_t cells = 1;
  for (AttrIndex a : attrs) {
    if (a >= attributes_.size()) {
      throw Error(ErrorCode::kBounds, "attribute index " + std::to_string(a) + " out of range");
    }
    const std::size_t n = attributes_[a].cardinality();
    if (n != 0 && cells > limit / n) {
      throw Error(ErrorCode::kConfiguration, "table over attribute set exceeds the dense size limit");
    }
    cells *= n;
  }
  return cells;
}

std::optional<Value> Domain::Encode(AttrIndex i, std::string_view label) const {
  const auto& cats = attributes_.at(i).categories;
  const auto it = std::find(cats.begin(), cats.end(), label);
  if (it == cats.end()) return std::nullopt;
  return static_cast<Value>(it - cats.begin());
}

const std::string& Domain::Decode(AttrIndex i, Value v) const {
  const auto& cats = attributes_.at(i).categories;
  if (v >= cats.size()) throw Error(ErrorCode::kBounds, "category index out of range");
  return cats[v];
}

Dataset::Dataset(Domain domain, std::vector<Value> cells,
                 std::optional<std::vector<HouseholdId>> households,
                 std::optional<std::vector<std::uint8_t>> membership)
    : domain_(std::move(domain)),
      cells_(std::move(cells)),
      households_(std::move(households)),
      membership_(std::move(membership)) {
  const std::size_t d = domain_.size();
  if (d == 0) {
    if (!cells_.empty()) throw Error(ErrorCode::kConfiguration, "cells given for an empty domain");
    rows_ = households_ ? households_->size() : 0;
  } else {
    if (cells_.size() % d != 0) {
      throw Error(ErrorCode::kConfiguration, "cell count is not a multiple of the attribute count");
    }
    rows_ = cells_.size() / d;
  }
  const auto cards = domain_.cardinalities();
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    if (cells_[k] >= cards[k % d]) {
      throw Error(ErrorCode::kBounds, "cell value out of domain in row " + std::to_string(k / d) +
                                          ", attribute '" + domain_.attribute(k % d).name + "'");
    }
  }
  if (households_ && households_->size() != rows_) {
    throw Error(ErrorCode::kConfiguration, "household ids do not match the row count");
  }
  if (membership_) {
    if (membership_->size() != rows_) {
      throw Error(ErrorCode::kConfiguration, "membership labels do not match the row count");
    }
    for (auto bit : *membership_) {
      if (bit > 1) throw Error(ErrorCode::kConfiguration, "membership labels must be 0 or 1");
    }
  }
}

Dataset Dataset::Select(std::span<const std::size_t> rows) const {
  const std::size_t d = domain_.size();
  std::vector<Value> cells;
  cells.reserve(rows.size() * d);
  std::optional<std::vector<HouseholdId>> hh;
  std::optional<std::vector<std::uint8_t>> mem;
  if (households_) hh.emplace().reserve(rows.size());
  if (membership_) mem.emplace().reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= rows_) throw Error(ErrorCode::kBounds, "row index out of range");
    const auto rec = row(r);
    cells.insert(cells.end(), rec.begin(), rec.end());
    if (hh) hh->push_back((*households_)[r]);
    if (mem) mem->push_back((*membership_)[r]);
  }
  return Dataset(domain_, std::move(cells), std::move(hh), std::move(mem));
}

Dataset Dataset::WithMembership(std::vector<std::uint8_t> labels) const {
  return Dataset(domain_, cells_, households_, std::move(labels));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// RFC-4180 record splitter. Quoted fields may contain separators, doubled
// quotes and line breaks.
class CsvReader {
 public:
  explicit CsvReader(std::string_view text) : text_(text) {}

  bool Next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
        continue;
      }
      if (c == '"') {
        if (!field.empty() || was_quoted) {
          throw Error(ErrorCode::kParse, "stray quote in line " + std::to_string(line_));
        }
        quoted = was_quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        ++line_;
        fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(c);
      }
    }
    if (quoted) throw Error(ErrorCode::kParse, "unterminated quoted field");
    fields.push_back(std::move(field));
    return true;
  }

  std::size_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

template <typename Int>
Int ParseInteger(const std::string& s, std::string_view what) {
  Int value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kParse, "invalid " + std::string(what) + " value '" + s + "'");
  }
  return value;
}

std::string QuoteCsv(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Dataset ParseCsv(std::string_view text, const std::optional<Domain>& schema) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvReader reader(text);
  std::vector<std::string> header;
  if (!reader.Next(header)) throw Error(ErrorCode::kParse, "missing header row");

  std::optional<std::size_t> household_col;
  std::optional<std::size_t> member_col;
  std::vector<std::size_t> attr_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == kHouseholdColumn) {
      household_col = c;
    } else if (header[c] == kMemberColumn) {
      member_col = c;
    } else {
      attr_cols.push_back(c);
      names.push_back(header[c]);
    }
  }

  // Map schema attributes to column positions.
  std::vector<Attribute> attrs;
  std::vector<std::size_t> schema_index(attr_cols.size());
  if (schema) {
    if (schema->size() != attr_cols.size()) {
      throw Error(ErrorCode::kSchemaViolation, "CSV has " + std::to_string(attr_cols.size()) +
                                                   " attribute columns, schema has " +
                                                   std::to_string(schema->size()));
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto idx = schema->IndexOf(names[k]);
      if (!idx) throw Error(ErrorCode::kSchemaViolation, "column '" + names[k] + "' not in schema");
      schema_index[k] = *idx;
    }
  } else {
    for (std::size_t k = 0; k < names.size(); ++k) {
      attrs.push_back({names[k], {}});
      schema_index[k] = k;
    }
  }
  std::vector<std::unordered_map<std::string, Value>> seen(attr_cols.size());

  const std::size_t d = attr_cols.size();
  std::vector<Value> cells;
  std::vector<HouseholdId> households;
  std::vector<std::uint8_t> members;
  std::vector<std::string> fields;
  std::vector<Value> record(d);
  while (reader.Next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kParse, "row before line " + std::to_string(reader.line()) + " has " +
                                         std::to_string(fields.size()) + " fields, expected " +
                                         std::to_string(header.size()));
    }
    for (std::size_t k = 0; k < d; ++k) {
      const std::string& label = fields[attr_cols[k]];
      const AttrIndex target = schema_index[k];
      if (schema) {
        const auto v = schema->Encode(target, label);
        if (!v) {
          throw Error(ErrorCode::kSchemaViolation,
                      "value '" + label + "' not a category of '" + names[k] + "'");
        }
        record[target] = *v;
      } else {
        auto [it, inserted] = seen[k].try_emplace(label, static_cast<Value>(seen[k].size()));
        if (inserted) attrs[k].categories.push_back(label);
        record[target] = it->second;
      }
    }
    cells.insert(cells.end(), record.begin(), record.end());
    if (household_col) households.push_back(ParseInteger<HouseholdId>(fields[*household_col], "household"));
    if (member_col) {
      const auto bit = ParseInteger<int>(fields[*member_col], "membership");
      if (bit != 0 && bit != 1) throw Error(ErrorCode::kParse, "membership must be 0 or 1");
      members.push_back(static_cast<std::uint8_t>(bit));
    }
  }

  std::optional<std::vector<HouseholdId>> hh;
  std::optional<std::vector<std::uint8_t>> mem;
  if (household_col) hh = std::move(households);
  if (member_col) mem = std::move(members);
  Domain domain = schema ? *schema : Domain(std::move(attrs));
  return Dataset(std::move(domain), std::move(cells), std::move(hh), std::move(mem));
}

Dataset LoadCsv(const std::filesystem::path& path, const std::optional<Domain>& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseCsv(buffer.str(), schema);
}

Domain MergeDomains(std::span<const Dataset> parts) {
  if (parts.empty()) throw Error(ErrorCode::kConfiguration, "no datasets to merge");
  std::vector<Attribute> attrs = parts.front().domain().attributes();
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const Domain& other = parts[p].domain();
    if (other.size() != attrs.size()) {
      throw Error(ErrorCode::kSchemaViolation, "inputs have different attribute counts");
    }
    for (auto& a : attrs) {
      const auto idx = other.IndexOf(a.name);
      if (!idx) throw Error(ErrorCode::kSchemaViolation, "attribute '" + a.name + "' missing in an input");
      for (const auto& c : other.attribute(*idx).categories) {
        if (std::find(a.categories.begin(), a.categories.end(), c) == a.categories.end()) {
          a.categories.push_back(c);
        }
      }
    }
  }
  return Domain(std::move(attrs));
}

std::string FormatCsv(const Dataset& ds) {
  const Domain& domain = ds.domain();
  auto join = [](const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) line.push_back(',');
      line += QuoteCsv(fields[k]);
    }
    line.push_back('\n');
    return line;
  };
  std::vector<std::string> fields;
  for (const auto& a : domain.attributes()) fields.push_back(a.name);
  if (ds.households()) fields.emplace_back(kHouseholdColumn);
  if (ds.membership()) fields.emplace_back(kMemberColumn);
  std::string out = join(fields);
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    fields.clear();
    for (std::size_t i = 0; i < domain.size(); ++i) fields.push_back(domain.Decode(i, ds.at(r, i)));
    if (ds.households()) fields.push_back(std::to_string((*ds.households())[r]));
    if (ds.membership()) fields.push_back(std::to_string(static_cast<int>((*ds.membership())[r])));
    out += join(fields);
  }
  return out;
}

void WriteCsv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << FormatCsv(ds);
}

nlohmann::json DomainToJson(const Domain& domain) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : domain.attributes()) {
    j.push_back({{"name", a.name}, {"categories", a.categories}});
  }
  return j;
}

Domain DomainFromJson(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kParse, "domain JSON must be a list");
  std::vector<Attribute> attrs;
  for (const auto& item : j) {
    Attribute a;
    a.name = item.at("name").get<std::string>();
    for (const auto& c : item.at("categories")) {
      a.categories.push_back(c.is_string() ? c.get<std::string>() : c.dump());
    }
    attrs.push_back(std::move(a));
  }
  return Domain(std::move(attrs));
}

// ---------------------------------------------------------------------------
// Experiment splits

SnakeSplit MakeSnakeSplit(const Dataset& aux, const SplitSpec& opt) {
  if (!aux.households()) {
    throw Error(ErrorCode::kConfiguration, "aux dataset has no household ids");
  }
  if (opt.member_fraction_of_households < 0.0 || opt.member_fraction_of_households > 1.0) {
    throw Error(ErrorCode::kConfiguration, "member fraction must lie in [0, 1]");
  }
  std::map<HouseholdId, std::vector<std::size_t>> by_household;
  const auto& ids = *aux.households();
  for (std::size_t r = 0; r < aux.rows(); ++r) by_household[ids[r]].push_back(r);

  std::vector<HouseholdId> qualifying;
  for (const auto& [id, rows] : by_household) {
    if (rows.size() >= opt.min_household_size) qualifying.push_back(id);
  }
  if (qualifying.size() < opt.n_target_households) {
    throw Error(ErrorCode::kConfiguration,
                "only " + std::to_string(qualifying.size()) + " households have at least " +
                    std::to_string(opt.min_household_size) + " members, " +
                    std::to_string(opt.n_target_households) + " requested");
  }

  Rng rng(opt.seed);
  const auto picked = rng.SampleWithoutReplacement(qualifying.size(), opt.n_target_households);
  std::vector<HouseholdId> targets;
  targets.reserve(picked.size());
  for (auto k : picked) targets.push_back(qualifying[k]);

  const auto n_members = static_cast<std::size_t>(
      std::floor(opt.member_fraction_of_households * static_cast<double>(targets.size())));
  const auto member_pick = rng.SampleWithoutReplacement(targets.size(), n_members);
  std::set<HouseholdId> members;
  for (auto k : member_pick) members.insert(targets[k]);

  SnakeSplit split;
  std::sort(targets.begin(), targets.end());
  split.target_households = targets;
  split.member_households.assign(members.begin(), members.end());

  std::vector<std::uint8_t> in_target(aux.rows(), 0);
  std::vector<std::size_t> member_rows;
  for (HouseholdId id : targets) {
    for (std::size_t r : by_household[id]) {
      in_target[r] = 1;
      if (members.count(id)) member_rows.push_back(r);
    }
  }
  for (std::size_t r = 0; r < aux.rows(); ++r) {
    if (in_target[r]) split.target_rows.push_back(r);
  }
  if (opt.train_size < member_rows.size()) {
    throw Error(ErrorCode::kConfiguration, "train size is smaller than the member households");
  }
  std::vector<std::size_t> outside;
  outside.reserve(aux.rows() - split.target_rows.size());
  for (std::size_t r = 0; r < aux.rows(); ++r) {
    if (!in_target[r]) outside.push_back(r);
  }
  const std::size_t padding = opt.train_size - member_rows.size();
  if (padding > outside.size()) {
    throw Error(ErrorCode::kConfiguration, "not enough non-target rows to reach the train size");
  }
  split.train_rows = member_rows;
  for (auto k : rng.SampleWithoutReplacement(outside.size(), padding)) {
    split.train_rows.push_back(outside[k]);
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());

  split.labels.reserve(split.target_rows.size());
  for (std::size_t r : split.target_rows) split.labels.push_back(members.count(ids[r]) ? 1 : 0);

  split.train = aux.Select(split.train_rows)
                    .WithMembership(std::vector<std::uint8_t>(split.train_rows.size(), 1));
  split.target = aux.Select(split.target_rows).WithMembership(split.labels);
  return split;
}

std::vector<std::uint8_t> AuxMembership(const Dataset& aux, const SnakeSplit& split) {
  std::vector<std::uint8_t> labels(aux.rows(), 0);
  for (std::size_t r : split.train_rows) labels[r] = 1;
  return labels;
}

}  // namespace tamis
