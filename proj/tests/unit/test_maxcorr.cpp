// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "stopaudit/error.hpp"
#include "stopaudit/maxcorr.hpp"

using namespace stopaudit;

namespace {

std::vector<double> grid(std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

CMRSeries series_of(const std::vector<double>& rates) {
  CMRSeries s;
  s.target = std::string(kDatasetTarget);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    char key[8];
    std::snprintf(key, sizeof key, "%04zu", i);
    s.points.push_back({BinId{key}, rates[i], 10, 0, 0});
  }
  return s;
}

// Best correlation any two-level transform of x attains with y, found by
// scanning every split of the sorted x values.
double best_split_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> levels(x);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    std::vector<double> f(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) f[i] = x[i] <= levels[k] ? 0.0 : 1.0;
    best = std::max(best, std::abs(pearson_correlation(f, y)));
  }
  return best;
}

// Named data shapes used by the property checks.
std::vector<std::pair<std::vector<double>, std::vector<double>>> property_inputs() {
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> norm;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  for (std::size_t n : {60u, 200u, 400u}) {
    for (int shape = 0; shape < 4; ++shape) {
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        switch (shape) {
          case 0:
            x[i] = norm(rng);
            y[i] = x[i] + norm(rng);
            break;
          case 1:
            x[i] = unif(rng);
            y[i] = unif(rng);
            break;
          case 2:
            x[i] = expo(rng);
            y[i] = std::log1p(x[i]) + 0.3 * norm(rng);
            break;
          default:
            x[i] = 6.0 * unif(rng);
            y[i] = std::sin(x[i]) + 0.2 * norm(rng);
        }
      }
      out.emplace_back(std::move(x), std::move(y));
    }
  }
  return out;
}

}  // namespace

TEST(MaxCorr, Identity) {
  const auto x = grid(100, 1.0, 100.0);
  const auto r = maximal_correlation(x, x);
  EXPECT_GE(r.value, 0.999);
  EXPECT_LE(r.value, 1.0);
  EXPECT_TRUE(r.converged);
}

TEST(MaxCorr, SquareOnSymmetricGrid) {
  const auto x = grid(201, -1.0, 1.0);
  std::vector<double> y(x.size()), fx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fx[i] = x[i] * x[i];
  EXPECT_LE(std::abs(pearson_correlation(x, y)), 0.05);
  // f(x) = x^2 with g(y) = y correlates perfectly.
  EXPECT_NEAR(pearson_correlation(fx, y), 1.0, 1e-12);
  EXPECT_GE(maximal_correlation(x, y).value, 0.99);
}

TEST(MaxCorr, IndependentUniform) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(1000), y(1000);
  for (auto& v : x) v = u(rng);
  for (auto& v : y) v = u(rng);
  EXPECT_LE(maximal_correlation(x, y).value, 0.2);
}

TEST(MaxCorr, Errors) {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, c{5, 5, 5};
  EXPECT_THROW(maximal_correlation(a, b), Error);
  EXPECT_THROW(maximal_correlation(b, b), Error);
  EXPECT_THROW(maximal_correlation(a, c), Error);
  EXPECT_THROW(maximal_correlation(c, a), Error);
  AceConfig bad;
  bad.tolerance = 0.0;
  EXPECT_THROW(maximal_correlation(a, a, bad), Error);
  bad = {};
  bad.max_iterations = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = {};
  bad.smoother_bins = 1;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(MaxCorr, ResolveBins) {
  const AceConfig cfg;
  EXPECT_EQ(cfg.resolve_bins(10), 2);
  EXPECT_EQ(cfg.resolve_bins(200), 10);
  EXPECT_EQ(cfg.resolve_bins(5000), 50);
  AceConfig fixed;
  fixed.smoother_bins = 7;
  EXPECT_EQ(fixed.resolve_bins(5000), 7);
}

TEST(MaxCorr, IncreasingSeries) {
  std::vector<double> rates(30);
  for (std::size_t i = 0; i < rates.size(); ++i) rates[i] = 0.01 * static_cast<double>(i * i);
  EXPECT_GE(series_maxcorr(series_of(rates)).value, 0.99);
}

TEST(MaxCorr, ConstantSeriesIsFlagged) {
  const auto r = series_maxcorr(series_of(std::vector<double>(10, 0.3)));
  EXPECT_TRUE(r.na);
  EXPECT_NE(r.reason.find("constant input vector"), std::string::npos);
  EXPECT_THROW(series_maxcorr(series_of({0.1, 0.2})), Error);
}

TEST(MaxCorr, LevelShiftSeries) {
  for (std::size_t n : {20u, 40u, 51u, 100u}) {
    std::vector<double> rates(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
      rates[i] = i < n / 2 ? 0.1 : 0.4;
      x[i] = static_cast<double>(i);
    }
    EXPECT_NEAR(best_split_correlation(x, rates), 1.0, 1e-12);
    EXPECT_GE(series_maxcorr(series_of(rates)).value, 0.9) << n;
  }
}

TEST(MaxCorr, FixedSelectionStillWorksOnClearSignal) {
  AceConfig cfg;
  cfg.selection = BinSelection::kFixed;
  const auto x = grid(300, 0.0, 1.0);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::exp(3.0 * x[i]);
  EXPECT_GE(maximal_correlation(x, y, cfg).value, 0.99);
}

TEST(MaxCorr, Properties) {
  for (const auto& [x, y] : property_inputs()) {
    const double xy = maximal_correlation(x, y).value;
    const double yx = maximal_correlation(y, x).value;
    EXPECT_LE(std::abs(xy - yx), 0.02);
    EXPECT_GE(xy, std::abs(pearson_correlation(x, y)) - 0.02);
    EXPECT_GE(xy, 0.0);
    EXPECT_LE(xy, 1.0);

    std::vector<double> tx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) tx[i] = std::atan(x[i]) + x[i] * x[i] * x[i];
    EXPECT_LE(std::abs(maximal_correlation(tx, y).value - xy), 0.02);

    const auto again = maximal_correlation(x, y);
    EXPECT_EQ(again.value, xy);
  }
}

TEST(MaxCorr, LatitudeOnlyRate) {
  CMRSeries s;
  s.spec = {BinKind::kGeohash, 4};
  std::set<std::string> seen;
  std::vector<double> lat, lon, rate;
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) {
      const double la = 39.0 + 0.2 * i;
      const double lo = -84.0 + 0.35 * j;
      const std::string key = geohash_encode(la, lo, 4).key;
      if (!seen.insert(key).second) continue;
      const GeoCell c = geohash_decode(key);
      s.points.push_back({BinId{key}, 0.0, 1, 0, 0});
      lat.push_back(c.lat_center());
      lon.push_back(c.lon_center());
    }
  }
  std::sort(s.points.begin(), s.points.end(),
            [](const CmrPoint& a, const CmrPoint& b) { return a.bin < b.bin; });
  lat.clear();
  lon.clear();
  for (auto& p : s.points) {
    const GeoCell c = geohash_decode(p.bin.key);
    p.rate = (c.lat_center() - 39.0) / 3.0;
    lat.push_back(c.lat_center());
    lon.push_back(c.lon_center());
    rate.push_back(p.rate);
  }
  const double first = maximal_correlation(lat, rate).value;
  const double second = maximal_correlation(lon, rate).value;
  EXPECT_GE(first, 0.99);
  EXPECT_NEAR(latlon_maxcorr(s).value, (first + second) / 2.0, 1e-12);
}

TEST(MaxCorr, HotspotAgainstLongerRun) {
  CMRSeries s;
  s.spec = {BinKind::kGeohash, 5};
  std::set<std::string> seen;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      const std::string key = geohash_encode(41.7 + 0.045 * i, -87.9 + 0.06 * j, 5).key;
      if (seen.insert(key).second) s.points.push_back({BinId{key}, 0.0, 1, 0, 0});
    }
  }
  std::sort(s.points.begin(), s.points.end(),
            [](const CmrPoint& a, const CmrPoint& b) { return a.bin < b.bin; });
  for (auto& p : s.points) {
    const GeoCell c = geohash_decode(p.bin.key);
    const double dy = (c.lat_center() - 42.35) / 0.4;
    const double dx = (c.lon_center() - (-87.0)) / 0.5;
    p.rate = std::exp(-(dx * dx + dy * dy));
  }
  const auto base = latlon_maxcorr(s);
  AceConfig tight;
  tight.max_iterations = 1000;
  tight.tolerance = 1e-7;
  const auto ref = latlon_maxcorr(s, tight);
  EXPECT_FALSE(base.na);
  EXPECT_NEAR(base.value, ref.value, 0.05);
}

TEST(MaxCorr, ConstantGeoRateIsFlagged) {
  CMRSeries s;
  s.spec = {BinKind::kGeohash, 6};
  for (const char* k : {"u4pruy", "u4pruz", "u4prv0", "u4prv1"}) {
    s.points.push_back({BinId{k}, 0.25, 3, 0, 0});
  }
  EXPECT_TRUE(latlon_maxcorr(s).na);
}

TEST(MaxCorr, PearsonBasics) {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1};
  EXPECT_NEAR(pearson_correlation(a, b), 1.0, 1e-15);
  EXPECT_NEAR(pearson_correlation(a, c), -1.0, 1e-15);
}
