// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "stopaudit/binning.hpp"
#include "stopaudit/error.hpp"

using namespace stopaudit;
using namespace std::chrono;

namespace {

// Bit-by-bit geohash with explicit interval halving.
std::string reference_geohash(double lat, double lon, int precision) {
  static const char* kAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
  double la[2] = {-90.0, 90.0};
  double lo[2] = {-180.0, 180.0};
  std::string out;
  bool even = true;
  int bits = 0;
  int value = 0;
  while (static_cast<int>(out.size()) < precision) {
    double* iv = even ? lo : la;
    const double v = even ? lon : lat;
    const double mid = (iv[0] + iv[1]) / 2.0;
    value <<= 1;
    if (v >= mid) {
      value |= 1;
      iv[0] = mid;
    } else {
      iv[1] = mid;
    }
    even = !even;
    if (++bits == 5) {
      out += kAlphabet[value];
      bits = 0;
      value = 0;
    }
  }
  return out;
}

Date ymd(int y, unsigned m, unsigned d) {
  return sys_days{year{y} / month{m} / day{d}};
}

}  // namespace

TEST(Binning, DayHourKeys) {
  EXPECT_EQ(bin_value(Cell{ymd(2016, 3, 14)}, {BinKind::kDay}).key, "2016-03-14");
  EXPECT_EQ(bin_value(Cell{TimeOfDay{8 * 3600}}, {BinKind::kHour}).key, "08");
  EXPECT_EQ(bin_value(Cell{TimeOfDay{23 * 3600 + 3599}}, {BinKind::kHour}).key, "23");
  EXPECT_EQ(bin_value(Cell{ymd(2016, 3, 14)}, {BinKind::kWeek}).key, "2016-W11");
}

TEST(Binning, RejectsNaAndKindMismatch) {
  EXPECT_THROW(bin_value(Cell{}, {BinKind::kDay}), Error);
  EXPECT_THROW(bin_value(Cell{TimeOfDay{0}}, {BinKind::kDay}), Error);
  EXPECT_THROW(bin_value(Cell{ymd(2016, 1, 1)}, {BinKind::kHour}), Error);
  EXPECT_THROW(bin_value(Cell{1.0}, {BinKind::kGeohash}), Error);
}

TEST(Binning, SpecValidation) {
  EXPECT_THROW((BinSpec{BinKind::kGeohash, 0}).validate(), Error);
  EXPECT_THROW((BinSpec{BinKind::kGeohash, 13}).validate(), Error);
  EXPECT_NO_THROW((BinSpec{BinKind::kGeohash, 12}).validate());
  EXPECT_EQ(parse_bin_kind("week"), BinKind::kWeek);
  EXPECT_THROW(parse_bin_kind("month"), Error);
}

// Calendar walk: week 1 of an ISO year is the week holding its first
// Thursday, so each Monday's week belongs to the year of its Thursday.
TEST(Binning, IsoWeekMatchesCalendarWalk) {
  Date monday = ymd(2000, 1, 3);
  int iso_year = 2000;
  unsigned week = 1;
  for (int w = 0; w < 52 * 60; ++w) {
    const Date thursday = monday + days{3};
    const int ty = static_cast<int>(year_month_day{thursday}.year());
    if (ty != iso_year) {
      iso_year = ty;
      week = 1;
    }
    char expect[16];
    std::snprintf(expect, sizeof expect, "%04d-W%02u", iso_year, week);
    for (int d = 0; d < 7; ++d) {
      const Date day = monday + days{d};
      const IsoWeek iw = iso_week(day);
      ASSERT_EQ(iw.year, iso_year);
      ASSERT_EQ(iw.week, week);
      ASSERT_EQ(bin_value(Cell{day}, {BinKind::kWeek}).key, expect);
    }
    monday += days{7};
    ++week;
  }
}

TEST(Binning, GeohashVector) {
  EXPECT_EQ(geohash_encode(57.64911, 10.40744, 6).key, "u4pruy");
  EXPECT_EQ(reference_geohash(57.64911, 10.40744, 6), "u4pruy");
  EXPECT_EQ(geohash_encode(57.64911, 10.40744, 11).key, "u4pruydqqvj");
}

TEST(Binning, GeohashRange) {
  try {
    geohash_encode(91.0, 0.0, 6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("latitude out of range"), std::string::npos);
  }
  EXPECT_THROW(geohash_encode(0.0, 180.5, 6), Error);
  EXPECT_THROW(geohash_encode(0.0, 0.0, 0), Error);
  EXPECT_NO_THROW(geohash_encode(90.0, 180.0, 6));
  EXPECT_NO_THROW(geohash_encode(-90.0, -180.0, 6));
}

// Properties on random points: agreement with the bitwise oracle, prefix
// nesting, decode containment.
TEST(Binning, GeohashProperties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ulat(-90.0, 90.0);
  std::uniform_real_distribution<double> ulon(-180.0, 180.0);
  for (int i = 0; i < 5000; ++i) {
    const double lat = ulat(rng);
    const double lon = ulon(rng);
    std::string prev;
    for (int p = 1; p <= 12; ++p) {
      const std::string h = geohash_encode(lat, lon, p).key;
      ASSERT_EQ(h, reference_geohash(lat, lon, p));
      ASSERT_EQ(h.substr(0, prev.size()), prev);
      ASSERT_TRUE(geohash_decode(h).contains(lat, lon)) << h;
      prev = h;
    }
  }
}

TEST(Binning, GeohashDecodeRejectsBadCharacters) {
  EXPECT_THROW(geohash_decode("u4pa"), Error);
  EXPECT_THROW(geohash_decode(""), Error);
}

TEST(Binning, CodesSortLikeKeys) {
  std::mt19937_64 rng(5);
  for (BinKind kind : {BinKind::kDay, BinKind::kWeek}) {
    const BinSpec spec{kind};
    for (int i = 0; i < 500; ++i) {
      const Date a = ymd(1990, 1, 1) + days{static_cast<int>(rng() % 20000)};
      const Date b = ymd(1990, 1, 1) + days{static_cast<int>(rng() % 20000)};
      const auto ca = bin_code(Cell{a}, spec);
      const auto cb = bin_code(Cell{b}, spec);
      EXPECT_EQ(ca < cb, bin_value(Cell{a}, spec).key < bin_value(Cell{b}, spec).key);
      EXPECT_EQ(format_bin(ca, spec), bin_value(Cell{a}, spec));
    }
  }
  const BinSpec geo{BinKind::kGeohash, 5};
  const auto code = bin_code(Cell{GeoPoint{57.64911, 10.40744}}, geo);
  EXPECT_EQ(format_bin(code, geo).key, "u4pru");
}

// Every non-NA conditioning row lands in exactly one bin; NA rows in none.
TEST(Binning, AssignmentCoversNonNaRows) {
  std::mt19937_64 rng(9);
  std::string text = "lat,lng,date\n";
  std::size_t na_rows = 0;
  for (int i = 0; i < 300; ++i) {
    const bool drop = rng() % 7 == 0;
    na_rows += drop;
    char line[96];
    std::snprintf(line, sizeof line, "%s,%.5f,2017-01-%02d\n",
                  drop ? "NA" : std::to_string(40.0 + (rng() % 1000) / 1000.0).c_str(),
                  -83.0 + (rng() % 1000) / 1000.0, static_cast<int>(1 + rng() % 28));
    text += line;
  }
  std::istringstream in(text);
  const std::vector<ColumnSchema> schema{{"lat", ColumnKind::kLatitude},
                                         {"lng", ColumnKind::kLongitude},
                                         {"date", ColumnKind::kDate}};
  const StopTable t = read_table(in, schema);
  const BinAssignment geo = assign_bins(t, "lat", {BinKind::kGeohash, 6});
  EXPECT_EQ(geo.unbinnable, na_rows);
  EXPECT_EQ(geo.conditioning_columns, (std::vector<std::string>{"lat", "lng"}));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    EXPECT_EQ(geo.codes[i] == kNoBin, t.column("lat").is_na(i));
  }
  const BinAssignment day = assign_bins(t, "date", {BinKind::kDay});
  EXPECT_EQ(day.unbinnable, 0u);
  EXPECT_THROW(assign_bins(t, "date", {BinKind::kHour}), Error);
  EXPECT_THROW(assign_bins(t, "nope", {BinKind::kDay}), Error);
}
