// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stopaudit/binning.hpp"
#include "stopaudit/ingest.hpp"

namespace stopaudit {

// omega[i][j] = 1 iff cell (i, j) is NA. Stored column-major.
class MissingnessMatrix {
 public:
  MissingnessMatrix() = default;
  MissingnessMatrix(std::size_t rows, std::vector<std::string> names,
                    std::vector<std::uint8_t> column_major);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  bool operator()(std::size_t row, std::size_t col) const {
    return cells_[col * rows_ + row] != 0;
  }
  std::span<const std::uint8_t> column(std::size_t col) const {
    return std::span<const std::uint8_t>(cells_).subspan(col * rows_, rows_);
  }

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<std::uint8_t> cells_;
};

MissingnessMatrix missingness_matrix(const StopTable& table);

struct CmrPoint {
  BinId bin;
  double rate = 0.0;       // masked_cells / cells
  std::size_t count = 0;   // |I_b|, rows in the bin
  std::uint64_t masked_cells = 0;
  std::uint64_t cells = 0;  // count * number of averaged variables
};

// Conditional missingness rate series. target is a variable name, or
// "dataset" for the dataset-level average. Empty bins are absent.
struct CMRSeries {
  std::string conditioning_variable;
  std::string target;
  BinSpec spec;
  std::vector<std::string> variables;  // variables averaged into each rate
  std::vector<CmrPoint> points;        // ordered by BinId
  std::size_t unbinnable = 0;          // rows with NA conditioning value
};

inline constexpr std::string_view kDatasetTarget = "dataset";

CMRSeries cmr(const StopTable& table, std::string_view target_var, std::string_view cond_var,
              const BinSpec& spec);

CMRSeries dcmr(const StopTable& table, std::string_view cond_var, const BinSpec& spec,
               std::span<const std::string> variables);

// Core variables present in the table, minus the conditioning column(s).
std::vector<std::string> default_dcmr_variables(const StopTable& table, std::string_view cond_var,
                                                const BinSpec& spec);

// Per-variable CMRs and the dCMR computed from a single bin assignment.
struct AuditSeries {
  CMRSeries dataset;
  std::vector<CMRSeries> per_variable;
};

AuditSeries cmr_all(const StopTable& table, std::string_view cond_var, const BinSpec& spec,
                    std::span<const std::string> variables);

}  // namespace stopaudit
