// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/maxcorr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "stopaudit/error.hpp"

namespace stopaudit {

namespace {

// Inverse standard normal CDF by bisection on erfc.
double normal_quantile(double u) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Equal-frequency binned conditional mean over one variable. Bins are cut on
// sorted position and tied values always share a bin, so the fit depends on
// the variable only through its ranks.
class BinnedSmoother {
 public:
  BinnedSmoother(std::span<const double> v, int max_bins, const AceConfig& cfg)
      : n_(v.size()),
        max_bins_(max_bins),
        bins_(max_bins),
        selection_(cfg.selection),
        penalty_(cfg.bin_penalty) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    tie_start_.resize(n_);
    tie_mid2_.resize(n_);
    std::size_t p = 0;
    while (p < n_) {
      std::size_t q = p + 1;
      while (q < n_ && v[order_[q]] == v[order_[p]]) ++q;
      for (std::size_t k = p; k < q; ++k) {
        tie_start_[k] = p;
        tie_mid2_[k] = p + q - 1;
      }
      p = q;
    }
  }

  // Picks the bin count used by the next smooth() call.
  void select(std::span<const double> target) {
    bins_ = max_bins_;
    if (selection_ != BinSelection::kPenalized) return;
    const double n = static_cast<double>(n_);
    double best = 0.0;
    for (int b = 1; b <= max_bins_; ++b) {
      fit(target, b);
      double rss = 0.0;
      for (std::size_t p = 0; p < n_; ++p) {
        const double r = target[order_[p]] - means_[bin_of(p, b)];
        rss += r * r;
      }
      double used = 0.0;
      for (double c : counts_) used += c > 0 ? 1.0 : 0.0;
      const double score = n * std::log(std::max(rss / n, 1e-300)) + penalty_ * used;
      if (b == 1 || score < best) {
        best = score;
        bins_ = b;
      }
    }
  }

  void smooth(std::span<const double> target, std::span<double> out) const {
    fit(target, bins_);
    for (std::size_t p = 0; p < n_; ++p) out[order_[p]] = means_[bin_of(p, bins_)];
  }

  // Tie-aware ranks in original order.
  std::vector<double> ranks() const {
    std::vector<double> out(n_);
    for (std::size_t p = 0; p < n_; ++p) {
      out[order_[p]] = static_cast<double>(tie_start_[p]);
    }
    return out;
  }

  // Normal quantiles of the mid-ranks; tied values share a score.
  std::vector<double> normal_scores() const {
    std::vector<double> out(n_);
    const double n = static_cast<double>(n_);
    for (std::size_t p = 0; p < n_; ++p) {
      const double u = (0.5 * static_cast<double>(tie_mid2_[p]) + 0.5) / n;
      out[order_[p]] = normal_quantile(u);
    }
    return out;
  }

 private:
  // A tie block lands in the bin holding its middle position.
  std::size_t bin_of(std::size_t sorted_pos, int bins) const {
    return tie_mid2_[sorted_pos] * static_cast<std::size_t>(bins) / (2 * n_);
  }

  void fit(std::span<const double> target, int bins) const {
    means_.assign(static_cast<std::size_t>(bins), 0.0);
    counts_.assign(static_cast<std::size_t>(bins), 0.0);
    for (std::size_t p = 0; p < n_; ++p) {
      const std::size_t b = bin_of(p, bins);
      means_[b] += target[order_[p]];
      counts_[b] += 1.0;
    }
    for (std::size_t b = 0; b < means_.size(); ++b) {
      if (counts_[b] > 0) means_[b] /= counts_[b];
    }
  }

  std::size_t n_;
  int max_bins_;
  int bins_;
  BinSelection selection_;
  double penalty_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> tie_start_;
  std::vector<std::size_t> tie_mid2_;  // twice the middle sorted position
  mutable std::vector<double> means_;
  mutable std::vector<double> counts_;
};

// Centers and scales to unit (population) variance. Returns false when the
// vector is constant.
bool standardize(std::span<double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double& x : v) {
    x -= mean;
    ss += x * x;
  }
  const double sd = std::sqrt(ss / n);
  if (!(sd > 1e-12)) return false;
  for (double& x : v) x /= sd;
  return true;
}

double mean_product(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s / static_cast<double>(a.size());
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

MaxCorrResult flagged(std::string reason) {
  MaxCorrResult r;
  r.na = true;
  r.value = std::numeric_limits<double>::quiet_NaN();
  r.reason = std::move(reason);
  return r;
}

// One ACE run: f lives on the u side, g on the v side and starts from the
// ranks of v.
MaxCorrResult alternate(BinnedSmoother& su, BinnedSmoother& sv, const AceConfig& cfg) {
  std::vector<double> g = sv.ranks();
  const std::size_t n = g.size();
  std::vector<double> f(n);
  standardize(g);
  MaxCorrResult r;
  double prev = std::numeric_limits<double>::quiet_NaN();
  double corr = 0.0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    r.iterations_used = it;
    su.select(g);
    su.smooth(g, f);
    if (!standardize(f)) {
      corr = 0.0;
      r.converged = true;
      break;
    }
    sv.select(f);
    sv.smooth(f, g);
    if (!standardize(g)) {
      corr = 0.0;
      r.converged = true;
      break;
    }
    corr = mean_product(f, g);
    if (std::abs(corr - prev) < cfg.tolerance) {
      r.converged = true;
      break;
    }
    prev = corr;
  }
  r.value = std::clamp(std::abs(corr), 0.0, 1.0);
  return r;
}

}  // namespace

void AceConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorKind::kUsage, "max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw Error(ErrorKind::kUsage, "tolerance must be > 0");
  if (smoother_bins != 0 && smoother_bins < 2) {
    throw Error(ErrorKind::kUsage, "smoother_bins must be >= 2");
  }
  if (!(bin_penalty >= 0.0)) throw Error(ErrorKind::kUsage, "bin_penalty must be >= 0");
}

int AceConfig::resolve_bins(std::size_t n) const {
  if (smoother_bins != 0) return smoother_bins;
  return std::max(2, static_cast<int>(std::min<std::size_t>(50, n / 20)));
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  if (!standardize(a) || !standardize(b)) return std::numeric_limits<double>::quiet_NaN();
  return mean_product(a, b);
}

MaxCorrResult maximal_correlation(std::span<const double> x, std::span<const double> y,
                                  const AceConfig& cfg) {
  cfg.validate();
  if (x.size() != y.size()) throw Error(ErrorKind::kDomain, "length mismatch");
  if (x.size() < 3) throw Error(ErrorKind::kDomain, "need at least 3 observations");
  if (is_constant(x) || is_constant(y)) throw Error(ErrorKind::kDomain, "constant input vector");

  const std::size_t n = x.size();
  const int bins = std::min<int>(cfg.resolve_bins(n), static_cast<int>(n));
  BinnedSmoother sx(x, bins, cfg);
  BinnedSmoother sy(y, bins, cfg);
  MaxCorrResult a = alternate(sx, sy, cfg);
  MaxCorrResult b = alternate(sy, sx, cfg);
  MaxCorrResult& best = b.value > a.value ? b : a;
  best.iterations_used = a.iterations_used + b.iterations_used;
  best.converged = a.converged && b.converged;
  // Ranks and normal scores are feasible transforms, so their correlations
  // bound the optimum from below.
  const double rank_corr = std::abs(pearson_correlation(sx.ranks(), sy.ranks()));
  const double score_corr = std::abs(pearson_correlation(sx.normal_scores(), sy.normal_scores()));
  best.value = std::min(1.0, std::max({best.value, rank_corr, score_corr}));
  return best;
}

MaxCorrResult series_maxcorr(const CMRSeries& series, const AceConfig& cfg) {
  if (series.points.size() < 3) {
    throw Error(ErrorKind::kDomain, "fewer than 3 bins");
  }
  std::vector<double> x(series.points.size()), y(series.points.size());
  for (std::size_t k = 0; k < series.points.size(); ++k) {
    x[k] = static_cast<double>(k);
    y[k] = series.points[k].rate;
  }
  if (is_constant(y)) return flagged("constant input vector");
  return maximal_correlation(x, y, cfg);
}

MaxCorrResult latlon_maxcorr(const CMRSeries& geo_series,
                             const std::map<std::string, double>& lat_of_bin,
                             const std::map<std::string, double>& lon_of_bin,
                             const AceConfig& cfg) {
  const auto& pts = geo_series.points;
  if (pts.size() < 3) throw Error(ErrorKind::kDomain, "fewer than 3 bins");
  std::vector<double> lat(pts.size()), lon(pts.size()), rate(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    auto la = lat_of_bin.find(pts[k].bin.key);
    auto lo = lon_of_bin.find(pts[k].bin.key);
    if (la == lat_of_bin.end() || lo == lon_of_bin.end()) {
      throw Error(ErrorKind::kUsage, "no cell center for bin \"" + pts[k].bin.key + "\"");
    }
    lat[k] = la->second;
    lon[k] = lo->second;
    rate[k] = pts[k].rate;
  }
  if (is_constant(rate)) return flagged("constant input vector");
  if (is_constant(lat) || is_constant(lon)) return flagged("constant input vector");

  const MaxCorrResult a = maximal_correlation(lat, rate, cfg);
  const MaxCorrResult b = maximal_correlation(lon, rate, cfg);
  MaxCorrResult r;
  r.value = 0.5 * (a.value + b.value);
  r.iterations_used = std::max(a.iterations_used, b.iterations_used);
  r.converged = a.converged && b.converged;
  return r;
}

MaxCorrResult latlon_maxcorr(const CMRSeries& geo_series, const AceConfig& cfg) {
  std::map<std::string, double> lat, lon;
  for (const auto& p : geo_series.points) {
    const GeoCell cell = geohash_decode(p.bin.key);
    lat[p.bin.key] = cell.lat_center();
    lon[p.bin.key] = cell.lon_center();
  }
  return latlon_maxcorr(geo_series, lat, lon, cfg);
}

}  // namespace stopaudit
