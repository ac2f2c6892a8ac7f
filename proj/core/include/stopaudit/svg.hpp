// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "stopaudit/csv.hpp"

namespace stopaudit {

// Static charts drawn from emitted CSV files, so every plotted number is
// one that was written out.
//   kDcmr: scatter of rate by bin, one circle per row. Columns
//     bin,target,rate,count; only rows whose target matches are drawn.
//   kOutcome: per-group strip of allocation disparities colored by
//     prop_white with a median line. Columns group,prop_white,disparity.
//   kAte: one panel per rho with a dashed zero line, an interval bar from
//     lower to upper and a naive point per plan row. Columns
//     plan,p_white,draw,rho,naive,lower,upper.
enum class ChartKind { kDcmr, kOutcome, kAte };

struct ChartOptions {
  std::string title;
  std::string target = "dataset";  // kDcmr only
};

// Throws Error(kDomain) when there is nothing to draw.
std::string render_svg(const csv::Document& doc, ChartKind kind, const ChartOptions& opts = {});

}  // namespace stopaudit
