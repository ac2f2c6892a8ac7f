// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include "stopaudit/missingness.hpp"

namespace stopaudit {

// How the binned-mean smoother picks its number of bins on each pass.
//   kFixed: always the resolved smoother_bins.
//   kPenalized: the count in [1, smoother_bins] minimizing
//     n*log(rss/n) + bin_penalty*bins, so noise is not chased.
enum class BinSelection { kFixed, kPenalized };

struct AceConfig {
  int max_iterations = 100;
  double tolerance = 1e-6;  // stop when |delta corr| < tolerance
  int smoother_bins = 0;    // 0 selects min(50, floor(n / 20)), at least 2
  BinSelection selection = BinSelection::kPenalized;
  double bin_penalty = 6.0;

  void validate() const;
  int resolve_bins(std::size_t n) const;
};

struct MaxCorrResult {
  double value = 0.0;  // in [0, 1]; meaningless when na is set
  int iterations_used = 0;
  bool converged = false;
  bool na = false;     // flagged NA (e.g. a constant input vector)
  std::string reason;  // why the result is NA
};

// Maximal correlation by Alternating Conditional Expectations: f(x) and g(y)
// are alternately replaced by the binned conditional mean of the other and
// standardized, until |corr(f(x), g(y))| stops moving. The iteration is run
// once from the ranks of y and once from the ranks of x and the larger optimum
// is kept, floored at the correlations of the ranks and of their normal
// scores. The result is symmetric and depends on the data only via ranks.
// Throws Error(kDomain) on length mismatch, n < 3 or a constant vector.
MaxCorrResult maximal_correlation(std::span<const double> x, std::span<const double> y,
                                  const AceConfig& cfg = {});

// x = bin ordinal, y = rate. Throws for fewer than 3 bins; a constant rate
// series comes back flagged NA.
MaxCorrResult series_maxcorr(const CMRSeries& series, const AceConfig& cfg = {});

// Mean of maximal_correlation(lat, rate) and maximal_correlation(lon, rate)
// over geohash bins located at the given cell centers.
MaxCorrResult latlon_maxcorr(const CMRSeries& geo_series,
                             const std::map<std::string, double>& lat_of_bin,
                             const std::map<std::string, double>& lon_of_bin,
                             const AceConfig& cfg = {});

// Same, with cell centers taken from geohash_decode of each bin key.
MaxCorrResult latlon_maxcorr(const CMRSeries& geo_series, const AceConfig& cfg = {});

double pearson_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace stopaudit
