// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "stopaudit/ingest.hpp"

namespace stopaudit {

enum class BinKind { kDay, kWeek, kHour, kGeohash };

std::string_view to_string(BinKind kind);
BinKind parse_bin_kind(std::string_view text);

struct BinSpec {
  BinKind kind = BinKind::kDay;
  int geohash_precision = 6;  // [1, 12], geohash bins only

  void validate() const;
};

// Bin label. Keys of one BinSpec kind sort lexicographically in bin order:
// "2016-03-14", "2016-W11", "08", "u4pruy".
struct BinId {
  std::string key;
  auto operator<=>(const BinId&) const = default;
};

// Maps a non-NA cell to its bin. Dates feed day/week, times feed hour, and a
// GeoPoint feeds geohash. Throws Error(kUsage) for NA or a kind mismatch.
BinId bin_value(const Cell& value, const BinSpec& spec);

// Standard base-32 geohash, longitude bit first.
BinId geohash_encode(double lat, double lon, int precision);

struct GeoCell {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  double lat_center() const { return 0.5 * (lat_min + lat_max); }
  double lon_center() const { return 0.5 * (lon_min + lon_max); }
  bool contains(double lat, double lon) const {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
};

GeoCell geohash_decode(std::string_view hash);

struct IsoWeek {
  int year = 0;
  unsigned week = 0;  // 1..53
};

IsoWeek iso_week(Date date);

// Integer bin codes. For a fixed BinSpec, code order equals key order, so
// per-row binning never has to build strings.
//   day: days since 1970-01-01 (shifted to stay non-negative)
//   week: iso_year * 100 + week
//   hour: 0..23
//   geohash: the 5*precision hash bits
inline constexpr std::uint64_t kNoBin = std::numeric_limits<std::uint64_t>::max();

std::uint64_t bin_code(const Cell& value, const BinSpec& spec);
BinId format_bin(std::uint64_t code, const BinSpec& spec);

// Row-to-bin assignment of a whole table over one conditioning variable.
// For geohash bins the conditioning variable must be the latitude or the
// longitude column; its partner is located by kind and both are consumed.
struct BinAssignment {
  BinSpec spec;
  std::vector<std::string> conditioning_columns;
  std::vector<std::uint64_t> codes;  // kNoBin for unbinnable rows
  std::size_t unbinnable = 0;        // rows with an NA conditioning value
};

BinAssignment assign_bins(const StopTable& table, std::string_view cond_var,
                          const BinSpec& spec);

}  // namespace stopaudit
