// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/missingness.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "stopaudit/error.hpp"

namespace stopaudit {

namespace {

// Dense, ordered bin numbering of a BinAssignment.
struct DenseBins {
  std::vector<std::uint64_t> codes;    // sorted distinct codes
  std::vector<std::uint32_t> row_bin;  // per row; UINT32_MAX when unbinnable
  std::vector<std::size_t> counts;     // rows per bin
};

constexpr std::uint32_t kNoDense = std::numeric_limits<std::uint32_t>::max();

DenseBins densify(const BinAssignment& a) {
  DenseBins d;
  std::unordered_map<std::uint64_t, std::uint32_t> first;
  for (std::uint64_t c : a.codes) {
    if (c != kNoBin && first.try_emplace(c, 0).second) d.codes.push_back(c);
  }
  std::sort(d.codes.begin(), d.codes.end());
  for (std::uint32_t k = 0; k < d.codes.size(); ++k) first[d.codes[k]] = k;

  d.row_bin.resize(a.codes.size(), kNoDense);
  d.counts.assign(d.codes.size(), 0);
  for (std::size_t i = 0; i < a.codes.size(); ++i) {
    if (a.codes[i] == kNoBin) continue;
    std::uint32_t k = first[a.codes[i]];
    d.row_bin[i] = k;
    ++d.counts[k];
  }
  return d;
}

std::vector<std::uint64_t> masked_per_bin(const Column& col, const DenseBins& bins) {
  std::vector<std::uint64_t> masked(bins.codes.size(), 0);
  auto mask = col.na_mask();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const std::uint32_t k = bins.row_bin[i];
    if (k != kNoDense) masked[k] += mask[i];
  }
  return masked;
}

void check_targets(const StopTable& table, const BinAssignment& a,
                   std::span<const std::string> variables) {
  if (variables.empty()) throw Error(ErrorKind::kUsage, "empty variable list");
  std::unordered_set<std::string> seen;
  for (const auto& v : variables) {
    table.column(v);  // throws for unknown variables
    if (std::find(a.conditioning_columns.begin(), a.conditioning_columns.end(), v) !=
        a.conditioning_columns.end()) {
      throw Error(ErrorKind::kUsage, "target \"" + v + "\" is the conditioning variable");
    }
    if (!seen.insert(v).second) {
      throw Error(ErrorKind::kUsage, "variable \"" + v + "\" listed twice");
    }
  }
}

CMRSeries make_series(const BinAssignment& a, std::string_view cond_var, std::string target,
                      std::vector<std::string> variables, const DenseBins& bins,
                      const std::vector<std::uint64_t>& masked) {
  CMRSeries s;
  s.conditioning_variable = std::string(cond_var);
  s.target = std::move(target);
  s.spec = a.spec;
  s.unbinnable = a.unbinnable;
  const std::uint64_t width = variables.size();
  s.variables = std::move(variables);
  s.points.reserve(bins.codes.size());
  for (std::size_t k = 0; k < bins.codes.size(); ++k) {
    CmrPoint p;
    p.bin = format_bin(bins.codes[k], a.spec);
    p.count = bins.counts[k];
    p.masked_cells = masked[k];
    p.cells = static_cast<std::uint64_t>(bins.counts[k]) * width;
    // A single division of exact integers keeps rational rates exact to the
    // nearest double (e.g. 3/15 == 0.2).
    p.rate = static_cast<double>(p.masked_cells) / static_cast<double>(p.cells);
    s.points.push_back(std::move(p));
  }
  return s;
}

}  // namespace

MissingnessMatrix::MissingnessMatrix(std::size_t rows, std::vector<std::string> names,
                                     std::vector<std::uint8_t> column_major)
    : rows_(rows), names_(std::move(names)), cells_(std::move(column_major)) {
  if (cells_.size() != rows_ * names_.size()) {
    throw Error(ErrorKind::kData, "missingness matrix shape mismatch");
  }
}

MissingnessMatrix missingness_matrix(const StopTable& table) {
  std::vector<std::uint8_t> cells;
  cells.reserve(table.rows() * table.cols());
  for (std::size_t j = 0; j < table.cols(); ++j) {
    auto mask = table.column(j).na_mask();
    cells.insert(cells.end(), mask.begin(), mask.end());
  }
  return MissingnessMatrix(table.rows(), table.names(), std::move(cells));
}

AuditSeries cmr_all(const StopTable& table, std::string_view cond_var, const BinSpec& spec,
                    std::span<const std::string> variables) {
  const BinAssignment a = assign_bins(table, cond_var, spec);
  check_targets(table, a, variables);
  const DenseBins bins = densify(a);

  AuditSeries out;
  std::vector<std::uint64_t> total(bins.codes.size(), 0);
  for (const auto& v : variables) {
    auto masked = masked_per_bin(table.column(v), bins);
    for (std::size_t k = 0; k < masked.size(); ++k) total[k] += masked[k];
    out.per_variable.push_back(make_series(a, cond_var, v, {v}, bins, masked));
  }
  out.dataset = make_series(a, cond_var, std::string(kDatasetTarget),
                            std::vector<std::string>(variables.begin(), variables.end()), bins,
                            total);
  return out;
}

CMRSeries cmr(const StopTable& table, std::string_view target_var, std::string_view cond_var,
              const BinSpec& spec) {
  if (target_var == cond_var) {
    throw Error(ErrorKind::kUsage, "target is the conditioning variable");
  }
  const std::string target(target_var);
  auto all = cmr_all(table, cond_var, spec, std::span<const std::string>(&target, 1));
  return std::move(all.per_variable.front());
}

CMRSeries dcmr(const StopTable& table, std::string_view cond_var, const BinSpec& spec,
               std::span<const std::string> variables) {
  return cmr_all(table, cond_var, spec, variables).dataset;
}

std::vector<std::string> default_dcmr_variables(const StopTable& table, std::string_view cond_var,
                                                const BinSpec& spec) {
  std::vector<std::string> excluded{std::string(cond_var)};
  if (spec.kind == BinKind::kGeohash) {
    if (const Column* c = table.find_kind(ColumnKind::kLatitude)) excluded.push_back(c->name());
    if (const Column* c = table.find_kind(ColumnKind::kLongitude)) excluded.push_back(c->name());
  }
  const auto& core = core_variables();
  std::vector<std::string> out;
  for (const auto& name : table.names()) {
    if (std::find(core.begin(), core.end(), name) == core.end()) continue;
    if (std::find(excluded.begin(), excluded.end(), name) != excluded.end()) continue;
    out.push_back(name);
  }
  return out;
}

}  // namespace stopaudit
