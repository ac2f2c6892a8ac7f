// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stopaudit {

enum class ColumnKind {
  kDate,
  kTime,
  kNumber,
  kCategory,
  kBoolean,
  kLatitude,
  kLongitude,
  kText,
};

enum class ColumnRole { kConditioningCandidate, kAnalysis, kPassthrough };

std::string_view to_string(ColumnKind kind);
std::string_view to_string(ColumnRole role);
ColumnKind parse_column_kind(std::string_view text);
ColumnRole parse_column_role(std::string_view text);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kText;
  ColumnRole role = ColumnRole::kAnalysis;
};

// Throws Error(kSchema) on duplicate names or a repeated latitude/longitude.
void validate_schema(std::span<const ColumnSchema> schema);

using Date = std::chrono::sys_days;

struct TimeOfDay {
  std::int32_t seconds = 0;  // [0, 86400)
  friend bool operator==(TimeOfDay, TimeOfDay) = default;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

// A single typed cell. monostate is NA. Category and text cells are views
// into column storage and live as long as the owning table.
using Cell = std::variant<std::monostate, Date, TimeOfDay, double, bool,
                          std::string_view, GeoPoint>;

inline bool is_na(const Cell& cell) {
  return std::holds_alternative<std::monostate>(cell);
}

// Text form that load_table parses back to the same cell. NA is "NA";
// a geographic point is "lat lon".
std::string format_cell(const Cell& cell);

struct CategoryData {
  std::vector<std::uint32_t> codes;
  std::vector<std::string> levels;
};

// Per-kind storage. Masked rows hold a default value.
//   date -> vector<Date>, time -> vector<TimeOfDay>,
//   number/latitude/longitude -> vector<double>, boolean -> vector<uint8_t>,
//   category -> CategoryData, text -> vector<string>
using ColumnData =
    std::variant<std::vector<Date>, std::vector<TimeOfDay>, std::vector<double>,
                 std::vector<std::uint8_t>, CategoryData,
                 std::vector<std::string>>;

class Column {
 public:
  Column(ColumnSchema schema, ColumnData data, std::vector<std::uint8_t> na_mask,
         std::size_t coercion_failures = 0);

  const ColumnSchema& schema() const { return schema_; }
  const std::string& name() const { return schema_.name; }
  ColumnKind kind() const { return schema_.kind; }

  std::size_t size() const { return na_mask_.size(); }
  bool is_na(std::size_t row) const { return na_mask_[row] != 0; }
  std::span<const std::uint8_t> na_mask() const { return na_mask_; }
  std::size_t na_count() const { return na_count_; }

  // Cells that were present but failed to parse under the declared kind.
  // Already included in na_count().
  std::size_t coercion_failures() const { return coercion_failures_; }

  Cell cell(std::size_t row) const;

  // Numeric view of a non-NA cell: days since epoch for dates, seconds for
  // times, 0/1 for booleans, category code for categories. Throws for text.
  double numeric(std::size_t row) const;

  const ColumnData& data() const { return data_; }

 private:
  ColumnSchema schema_;
  ColumnData data_;
  std::vector<std::uint8_t> na_mask_;
  std::size_t na_count_ = 0;
  std::size_t coercion_failures_ = 0;
};

// Immutable columnar stop-record table with an explicit NA mask. Columns are
// shared, so subsets are cheap views.
class StopTable {
 public:
  StopTable() = default;
  explicit StopTable(std::vector<std::shared_ptr<const Column>> columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }

  const Column& column(std::size_t j) const { return *columns_[j]; }
  const Column& column(std::string_view name) const;
  const Column* find(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  const Column* find_kind(ColumnKind kind) const;

  bool is_na(std::size_t row, std::size_t col) const {
    return columns_[col]->is_na(row);
  }

  std::vector<ColumnSchema> schema() const;
  std::vector<std::string> names() const;

  // Columns in the given order; every name must exist.
  StopTable select(std::span<const std::string> names) const;

 private:
  std::vector<std::shared_ptr<const Column>> columns_;
  std::size_t rows_ = 0;
};

std::set<std::string> default_na_tokens();

struct LoadOptions {
  std::set<std::string> na_tokens = default_na_tokens();
  char delimiter = ',';
};

// Schema plus parsing options as read from a dataset config file (JSON keys
// `columns`, `na_tokens`, `delimiter`).
struct DatasetConfig {
  std::string dataset_id;
  std::vector<ColumnSchema> columns;
  LoadOptions options;
};

DatasetConfig parse_dataset_config(std::string_view json_text);
DatasetConfig load_dataset_config(const std::string& path);

StopTable load_table(const std::string& path, std::span<const ColumnSchema> schema,
                     const LoadOptions& options = {});

// Same as load_table, reading from an already open stream.
StopTable read_table(std::istream& in, std::span<const ColumnSchema> schema,
                     const LoadOptions& options = {});

// The twenty most commonly recorded stop-record variables, as SOPP column
// names.
const std::vector<std::string>& core_variables();

struct SubsetResult {
  StopTable table;
  std::vector<std::string> skipped;  // requested names not in the table
};

// Keeps the table's columns whose names are in core_list, in table order.
SubsetResult core_variable_subset(const StopTable& table,
                                  std::span<const std::string> core_list);

struct VariableMissingSummary {
  std::string variable;
  std::optional<double> pct_missing;  // nullopt when the table has no rows
  std::size_t n_missing = 0;
  std::size_t n_total = 0;
  std::size_t coercion_failures = 0;
};

std::vector<VariableMissingSummary> per_variable_missing_summary(
    const StopTable& table);

}  // namespace stopaudit
