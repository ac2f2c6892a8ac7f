// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "stopaudit/csv.hpp"
#include "stopaudit/error.hpp"

namespace stopaudit {

namespace {

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool parse_fixed_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// YYYY-MM-DD
std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_fixed_int(s.substr(0, 4), y) || !parse_fixed_int(s.substr(5, 2), m) ||
      !parse_fixed_int(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

// HH:MM:SS
std::optional<TimeOfDay> parse_time(std::string_view s) {
  if (s.size() != 8 || s[2] != ':' || s[5] != ':') return std::nullopt;
  int h = 0, m = 0, sec = 0;
  if (!parse_fixed_int(s.substr(0, 2), h) || !parse_fixed_int(s.substr(3, 2), m) ||
      !parse_fixed_int(s.substr(6, 2), sec)) {
    return std::nullopt;
  }
  if (h > 23 || m > 59 || sec > 59) return std::nullopt;
  return TimeOfDay{h * 3600 + m * 60 + sec};
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  std::string v = lower(s);
  if (v == "true" || v == "t" || v == "1" || v == "yes" || v == "y") return true;
  if (v == "false" || v == "f" || v == "0" || v == "no" || v == "n") return false;
  return std::nullopt;
}

class ColumnBuilder {
 public:
  explicit ColumnBuilder(ColumnSchema schema) : schema_(std::move(schema)) {
    switch (schema_.kind) {
      case ColumnKind::kDate: data_ = std::vector<Date>{}; break;
      case ColumnKind::kTime: data_ = std::vector<TimeOfDay>{}; break;
      case ColumnKind::kNumber:
      case ColumnKind::kLatitude:
      case ColumnKind::kLongitude: data_ = std::vector<double>{}; break;
      case ColumnKind::kBoolean: data_ = std::vector<std::uint8_t>{}; break;
      case ColumnKind::kCategory: data_ = CategoryData{}; break;
      case ColumnKind::kText: data_ = std::vector<std::string>{}; break;
    }
  }

  void append_na() {
    mask_.push_back(1);
    std::visit(
        [](auto& v) {
          using V = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<V, CategoryData>) {
            v.codes.push_back(0);
          } else {
            v.emplace_back();
          }
        },
        data_);
  }

  void append(std::string_view value) {
    bool ok = true;
    switch (schema_.kind) {
      case ColumnKind::kDate: ok = push(parse_date(value)); break;
      case ColumnKind::kTime: ok = push(parse_time(value)); break;
      case ColumnKind::kNumber: ok = push(parse_number(value)); break;
      case ColumnKind::kLatitude: {
        auto v = parse_number(value);
        ok = push(v && *v >= -90.0 && *v <= 90.0 ? v : std::nullopt);
        break;
      }
      case ColumnKind::kLongitude: {
        auto v = parse_number(value);
        ok = push(v && *v >= -180.0 && *v <= 180.0 ? v : std::nullopt);
        break;
      }
      case ColumnKind::kBoolean: {
        auto v = parse_bool(value);
        ok = push(v ? std::optional<std::uint8_t>(*v ? 1 : 0) : std::nullopt);
        break;
      }
      case ColumnKind::kCategory: {
        auto& cat = std::get<CategoryData>(data_);
        auto [it, inserted] = level_index_.try_emplace(std::string(value),
                                                       static_cast<std::uint32_t>(cat.levels.size()));
        if (inserted) cat.levels.emplace_back(value);
        cat.codes.push_back(it->second);
        mask_.push_back(0);
        break;
      }
      case ColumnKind::kText:
        std::get<std::vector<std::string>>(data_).emplace_back(value);
        mask_.push_back(0);
        break;
    }
    if (!ok) ++coercion_failures_;
  }

  std::shared_ptr<const Column> finish() {
    return std::make_shared<const Column>(std::move(schema_), std::move(data_),
                                          std::move(mask_), coercion_failures_);
  }

 private:
  template <class T>
  bool push(std::optional<T> v) {
    if (!v) {
      append_na();
      return false;
    }
    std::get<std::vector<T>>(data_).push_back(*v);
    mask_.push_back(0);
    return true;
  }

  ColumnSchema schema_;
  ColumnData data_;
  std::vector<std::uint8_t> mask_;
  std::size_t coercion_failures_ = 0;
  std::unordered_map<std::string, std::uint32_t> level_index_;
};

struct KindName {
  ColumnKind kind;
  std::string_view name;
};
constexpr KindName kKindNames[] = {
    {ColumnKind::kDate, "date"},         {ColumnKind::kTime, "time"},
    {ColumnKind::kNumber, "number"},     {ColumnKind::kCategory, "category"},
    {ColumnKind::kBoolean, "boolean"},   {ColumnKind::kLatitude, "latitude"},
    {ColumnKind::kLongitude, "longitude"}, {ColumnKind::kText, "text"},
};

}  // namespace

std::string_view to_string(ColumnKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "text";
}

std::string_view to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::kConditioningCandidate: return "conditioning-candidate";
    case ColumnRole::kAnalysis: return "analysis";
    case ColumnRole::kPassthrough: return "passthrough";
  }
  return "analysis";
}

ColumnKind parse_column_kind(std::string_view text) {
  for (const auto& kn : kKindNames) {
    if (kn.name == text) return kn.kind;
  }
  throw Error(ErrorKind::kSchema, "unknown column kind \"" + std::string(text) + "\"");
}

ColumnRole parse_column_role(std::string_view text) {
  if (text == "conditioning-candidate") return ColumnRole::kConditioningCandidate;
  if (text == "analysis") return ColumnRole::kAnalysis;
  if (text == "passthrough") return ColumnRole::kPassthrough;
  throw Error(ErrorKind::kSchema, "unknown column role \"" + std::string(text) + "\"");
}

void validate_schema(std::span<const ColumnSchema> schema) {
  std::unordered_set<std::string> seen;
  int lat = 0, lon = 0;
  for (const auto& c : schema) {
    if (!seen.insert(c.name).second) {
      throw Error(ErrorKind::kSchema, "duplicate column name \"" + c.name + "\"");
    }
    lat += c.kind == ColumnKind::kLatitude;
    lon += c.kind == ColumnKind::kLongitude;
  }
  if (lat > 1) throw Error(ErrorKind::kSchema, "more than one latitude column");
  if (lon > 1) throw Error(ErrorKind::kSchema, "more than one longitude column");
}

Column::Column(ColumnSchema schema, ColumnData data, std::vector<std::uint8_t> na_mask,
               std::size_t coercion_failures)
    : schema_(std::move(schema)),
      data_(std::move(data)),
      na_mask_(std::move(na_mask)),
      coercion_failures_(coercion_failures) {
  std::size_t n = std::visit(
      [](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, CategoryData>) {
          return v.codes.size();
        } else {
          return v.size();
        }
      },
      data_);
  if (n != na_mask_.size()) {
    throw Error(ErrorKind::kData, "column \"" + schema_.name + "\": value/mask length mismatch");
  }
  na_count_ = static_cast<std::size_t>(std::count(na_mask_.begin(), na_mask_.end(), 1));
}

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "NA"; }
    std::string operator()(Date d) const {
      const std::chrono::year_month_day ymd{d};
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      return buf;
    }
    std::string operator()(TimeOfDay t) const {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", t.seconds / 3600, t.seconds / 60 % 60,
                    t.seconds % 60);
      return buf;
    }
    std::string operator()(double v) const { return csv::format_double(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(std::string_view v) const { return std::string(v); }
    std::string operator()(GeoPoint p) const {
      return csv::format_double(p.lat) + " " + csv::format_double(p.lon);
    }
  };
  return std::visit(Visitor{}, cell);
}

Cell Column::cell(std::size_t row) const {
  if (is_na(row)) return std::monostate{};
  return std::visit(
      [row](const auto& v) -> Cell {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, CategoryData>) {
          return std::string_view(v.levels[v.codes[row]]);
        } else if constexpr (std::is_same_v<V, std::vector<std::string>>) {
          return std::string_view(v[row]);
        } else if constexpr (std::is_same_v<V, std::vector<std::uint8_t>>) {
          return v[row] != 0;
        } else {
          return v[row];
        }
      },
      data_);
}

double Column::numeric(std::size_t row) const {
  return std::visit(
      [&](const auto& v) -> double {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::vector<Date>>) {
          return static_cast<double>(v[row].time_since_epoch().count());
        } else if constexpr (std::is_same_v<V, std::vector<TimeOfDay>>) {
          return v[row].seconds;
        } else if constexpr (std::is_same_v<V, CategoryData>) {
          return v.codes[row];
        } else if constexpr (std::is_same_v<V, std::vector<std::string>>) {
          throw Error(ErrorKind::kUsage,
                      "column \"" + schema_.name + "\" is text and has no numeric value");
        } else {
          return static_cast<double>(v[row]);
        }
      },
      data_);
}

StopTable::StopTable(std::vector<std::shared_ptr<const Column>> columns)
    : columns_(std::move(columns)) {
  std::vector<ColumnSchema> s = schema();
  validate_schema(s);
  if (!columns_.empty()) rows_ = columns_.front()->size();
  for (const auto& c : columns_) {
    if (c->size() != rows_) {
      throw Error(ErrorKind::kData, "column \"" + c->name() + "\" has " +
                                        std::to_string(c->size()) + " rows, expected " +
                                        std::to_string(rows_));
    }
  }
}

const Column* StopTable::find(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c->name() == name) return c.get();
  }
  return nullptr;
}

const Column& StopTable::column(std::string_view name) const {
  if (const Column* c = find(name)) return *c;
  throw Error(ErrorKind::kUsage, "unknown variable \"" + std::string(name) + "\"");
}

std::optional<std::size_t> StopTable::index_of(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j]->name() == name) return j;
  }
  return std::nullopt;
}

const Column* StopTable::find_kind(ColumnKind kind) const {
  for (const auto& c : columns_) {
    if (c->kind() == kind) return c.get();
  }
  return nullptr;
}

std::vector<ColumnSchema> StopTable::schema() const {
  std::vector<ColumnSchema> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c->schema());
  return out;
}

std::vector<std::string> StopTable::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c->name());
  return out;
}

StopTable StopTable::select(std::span<const std::string> names) const {
  std::vector<std::shared_ptr<const Column>> picked;
  picked.reserve(names.size());
  for (const auto& name : names) {
    auto j = index_of(name);
    if (!j) throw Error(ErrorKind::kUsage, "unknown variable \"" + name + "\"");
    picked.push_back(columns_[*j]);
  }
  StopTable out(std::move(picked));
  out.rows_ = rows_;
  return out;
}

std::set<std::string> default_na_tokens() {
  return {"", "NA", "N/A", "NULL", "null", "unknown"};
}

StopTable read_table(std::istream& in, std::span<const ColumnSchema> schema,
                     const LoadOptions& options) {
  validate_schema(schema);

  std::unordered_set<std::string> na;
  for (const auto& t : options.na_tokens) na.insert(lower(trim(t)));

  csv::Reader reader(in, options.delimiter);
  std::vector<std::string> header;
  if (!reader.next(header)) {
    throw Error(ErrorKind::kData, "input has no header row");
  }
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name(trim(header[i]));
    if (!position.emplace(name, i).second) {
      throw Error(ErrorKind::kSchema, "duplicate header name \"" + name + "\"");
    }
  }

  std::vector<ColumnBuilder> builders;
  std::vector<std::size_t> source;
  builders.reserve(schema.size());
  for (const auto& col : schema) {
    auto it = position.find(col.name);
    if (it == position.end()) {
      throw Error(ErrorKind::kSchema, "missing column \"" + col.name + "\"");
    }
    builders.emplace_back(col);
    source.push_back(it->second);
  }

  std::vector<std::string> fields;
  std::string key;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty() && header.size() > 1) continue;
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kData, "line " + std::to_string(reader.line()) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < builders.size(); ++j) {
      std::string_view value = trim(fields[source[j]]);
      key.assign(value);
      for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (na.contains(key)) {
        builders[j].append_na();
      } else {
        builders[j].append(value);
      }
    }
  }

  std::vector<std::shared_ptr<const Column>> columns;
  columns.reserve(builders.size());
  for (auto& b : builders) columns.push_back(b.finish());
  return StopTable(std::move(columns));
}

StopTable load_table(const std::string& path, std::span<const ColumnSchema> schema,
                     const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return read_table(in, schema, options);
}

DatasetConfig parse_dataset_config(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "config must be a JSON object");

  DatasetConfig cfg;
  try {
    cfg.dataset_id = doc.value("dataset_id", std::string{});
    if (doc.contains("columns")) {
      for (const auto& c : doc.at("columns")) {
        ColumnSchema s;
        s.name = c.at("name").get<std::string>();
        s.kind = parse_column_kind(c.value("kind", std::string("text")));
        s.role = parse_column_role(c.value("role", std::string("analysis")));
        cfg.columns.push_back(std::move(s));
      }
    }
    if (doc.contains("na_tokens")) {
      cfg.options.na_tokens.clear();
      for (const auto& t : doc.at("na_tokens")) cfg.options.na_tokens.insert(t.get<std::string>());
    }
    if (doc.contains("delimiter")) {
      std::string d = doc.at("delimiter").get<std::string>();
      if (d == "\\t" || d == "tab") d = "\t";
      if (d.size() != 1) throw Error(ErrorKind::kSchema, "delimiter must be a single character");
      cfg.options.delimiter = d[0];
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed config: ") + e.what());
  }
  validate_schema(cfg.columns);
  return cfg;
}

DatasetConfig load_dataset_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset_config(ss.str());
}

const std::vector<std::string>& core_variables() {
  static const std::vector<std::string> kCore = {
      "date",           "subject_race",     "outcome",         "location",
      "time",           "subject_sex",      "citation_issued", "subject_age",
      "lat",            "lng",              "warning_issued",  "arrest_made",
      "search_conducted", "violation",      "officer_id_hash", "contraband_found",
      "search_basis",   "reason_for_stop",  "county_name",     "vehicle_make",
  };
  return kCore;
}

SubsetResult core_variable_subset(const StopTable& table, std::span<const std::string> core_list) {
  if (core_list.empty()) throw Error(ErrorKind::kUsage, "core variable list is empty");
  std::unordered_set<std::string> wanted(core_list.begin(), core_list.end());
  SubsetResult result;
  std::vector<std::string> keep;
  for (const auto& name : table.names()) {
    if (wanted.contains(name)) keep.push_back(name);
  }
  for (const auto& name : core_list) {
    if (!table.find(name)) result.skipped.push_back(name);
  }
  if (keep.empty()) throw Error(ErrorKind::kSchema, "zero surviving columns");
  result.table = table.select(keep);
  return result;
}

std::vector<VariableMissingSummary> per_variable_missing_summary(const StopTable& table) {
  std::vector<VariableMissingSummary> out;
  out.reserve(table.cols());
  for (std::size_t j = 0; j < table.cols(); ++j) {
    const Column& c = table.column(j);
    VariableMissingSummary s;
    s.variable = c.name();
    s.n_total = c.size();
    s.n_missing = c.na_count();
    s.coercion_failures = c.coercion_failures();
    if (s.n_total > 0) {
      s.pct_missing = static_cast<double>(s.n_missing) / static_cast<double>(s.n_total);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace stopaudit
