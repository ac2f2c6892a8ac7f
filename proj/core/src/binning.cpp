// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/binning.hpp"

#include <cstdio>

#include "stopaudit/error.hpp"

namespace stopaudit {

namespace {

constexpr char kBase32[] = "0123456789bcdefghjkmnpqrstuvwxyz";
constexpr std::int64_t kDayOffset = 1 << 30;

int base32_value(char c) {
  for (int i = 0; i < 32; ++i) {
    if (kBase32[i] == c) return i;
  }
  return -1;
}

std::uint64_t geohash_bits(double lat, double lon, int precision) {
  if (!(lat >= -90.0 && lat <= 90.0)) throw Error(ErrorKind::kDomain, "latitude out of range");
  if (!(lon >= -180.0 && lon <= 180.0)) throw Error(ErrorKind::kDomain, "longitude out of range");
  if (precision < 1 || precision > 12) {
    throw Error(ErrorKind::kUsage, "geohash precision must be in [1, 12]");
  }
  double lat_lo = -90.0, lat_hi = 90.0;
  double lon_lo = -180.0, lon_hi = 180.0;
  std::uint64_t bits = 0;
  bool lon_bit = true;
  for (int i = 0; i < precision * 5; ++i) {
    if (lon_bit) {
      double mid = 0.5 * (lon_lo + lon_hi);
      if (lon >= mid) {
        bits = (bits << 1) | 1u;
        lon_lo = mid;
      } else {
        bits <<= 1;
        lon_hi = mid;
      }
    } else {
      double mid = 0.5 * (lat_lo + lat_hi);
      if (lat >= mid) {
        bits = (bits << 1) | 1u;
        lat_lo = mid;
      } else {
        bits <<= 1;
        lat_hi = mid;
      }
    }
    lon_bit = !lon_bit;
  }
  return bits;
}

std::string geohash_string(std::uint64_t bits, int precision) {
  std::string out(static_cast<std::size_t>(precision), '0');
  for (int i = precision - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kBase32[bits & 31u];
    bits >>= 5;
  }
  return out;
}

bool kind_feeds(ColumnKind kind, BinKind bin) {
  switch (bin) {
    case BinKind::kDay:
    case BinKind::kWeek: return kind == ColumnKind::kDate;
    case BinKind::kHour: return kind == ColumnKind::kTime;
    case BinKind::kGeohash:
      return kind == ColumnKind::kLatitude || kind == ColumnKind::kLongitude;
  }
  return false;
}

}  // namespace

std::string_view to_string(BinKind kind) {
  switch (kind) {
    case BinKind::kDay: return "day";
    case BinKind::kWeek: return "week";
    case BinKind::kHour: return "hour";
    case BinKind::kGeohash: return "geohash";
  }
  return "day";
}

BinKind parse_bin_kind(std::string_view text) {
  if (text == "day") return BinKind::kDay;
  if (text == "week") return BinKind::kWeek;
  if (text == "hour") return BinKind::kHour;
  if (text == "geohash") return BinKind::kGeohash;
  throw Error(ErrorKind::kUsage, "unknown bin kind \"" + std::string(text) + "\"");
}

void BinSpec::validate() const {
  if (geohash_precision < 1 || geohash_precision > 12) {
    throw Error(ErrorKind::kUsage, "geohash precision must be in [1, 12]");
  }
}

IsoWeek iso_week(Date date) {
  using namespace std::chrono;
  const auto wd = weekday{date}.iso_encoding();  // Monday = 1
  const Date thursday = date + days{4 - static_cast<int>(wd)};
  const year y = year_month_day{thursday}.year();
  const Date jan1 = sys_days{y / January / 1};
  return {static_cast<int>(y), static_cast<unsigned>((thursday - jan1).count() / 7 + 1)};
}

std::uint64_t bin_code(const Cell& value, const BinSpec& spec) {
  if (is_na(value)) throw Error(ErrorKind::kUsage, "cannot bin an NA value");
  switch (spec.kind) {
    case BinKind::kDay:
    case BinKind::kWeek: {
      const auto* d = std::get_if<Date>(&value);
      if (!d) throw Error(ErrorKind::kUsage, "incompatible kind: day/week bins need a date");
      if (spec.kind == BinKind::kDay) {
        return static_cast<std::uint64_t>(d->time_since_epoch().count() + kDayOffset);
      }
      IsoWeek w = iso_week(*d);
      return static_cast<std::uint64_t>(w.year) * 100u + w.week;
    }
    case BinKind::kHour: {
      const auto* t = std::get_if<TimeOfDay>(&value);
      if (!t) throw Error(ErrorKind::kUsage, "incompatible kind: hour bins need a time");
      return static_cast<std::uint64_t>(t->seconds / 3600);
    }
    case BinKind::kGeohash: {
      const auto* p = std::get_if<GeoPoint>(&value);
      if (!p) {
        throw Error(ErrorKind::kUsage, "incompatible kind: geohash bins need a lat/lon pair");
      }
      return geohash_bits(p->lat, p->lon, spec.geohash_precision);
    }
  }
  throw Error(ErrorKind::kUsage, "unknown bin kind");
}

BinId format_bin(std::uint64_t code, const BinSpec& spec) {
  char buf[32];
  switch (spec.kind) {
    case BinKind::kDay: {
      using namespace std::chrono;
      const Date d{days{static_cast<std::int64_t>(code) - kDayOffset}};
      const year_month_day ymd{d};
      std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      return {buf};
    }
    case BinKind::kWeek:
      std::snprintf(buf, sizeof(buf), "%04d-W%02u", static_cast<int>(code / 100),
                    static_cast<unsigned>(code % 100));
      return {buf};
    case BinKind::kHour:
      std::snprintf(buf, sizeof(buf), "%02u", static_cast<unsigned>(code));
      return {buf};
    case BinKind::kGeohash:
      return {geohash_string(code, spec.geohash_precision)};
  }
  return {};
}

BinId bin_value(const Cell& value, const BinSpec& spec) {
  spec.validate();
  return format_bin(bin_code(value, spec), spec);
}

BinId geohash_encode(double lat, double lon, int precision) {
  return {geohash_string(geohash_bits(lat, lon, precision), precision)};
}

GeoCell geohash_decode(std::string_view hash) {
  if (hash.empty() || hash.size() > 12) {
    throw Error(ErrorKind::kUsage, "geohash length must be in [1, 12]");
  }
  GeoCell cell{-90.0, 90.0, -180.0, 180.0};
  bool lon_bit = true;
  for (char c : hash) {
    int v = base32_value(c);
    if (v < 0) throw Error(ErrorKind::kData, "invalid geohash character");
    for (int b = 4; b >= 0; --b) {
      const bool one = ((v >> b) & 1) != 0;
      if (lon_bit) {
        double mid = 0.5 * (cell.lon_min + cell.lon_max);
        (one ? cell.lon_min : cell.lon_max) = mid;
      } else {
        double mid = 0.5 * (cell.lat_min + cell.lat_max);
        (one ? cell.lat_min : cell.lat_max) = mid;
      }
      lon_bit = !lon_bit;
    }
  }
  return cell;
}

BinAssignment assign_bins(const StopTable& table, std::string_view cond_var,
                          const BinSpec& spec) {
  spec.validate();
  const Column& cond = table.column(cond_var);
  if (!kind_feeds(cond.kind(), spec.kind)) {
    throw Error(ErrorKind::kUsage, "incompatible kind: column \"" + cond.name() + "\" (" +
                                       std::string(to_string(cond.kind())) +
                                       ") cannot be binned by " +
                                       std::string(to_string(spec.kind)));
  }

  BinAssignment out;
  out.spec = spec;
  out.codes.resize(table.rows(), kNoBin);

  if (spec.kind == BinKind::kGeohash) {
    const Column* lat = table.find_kind(ColumnKind::kLatitude);
    const Column* lon = table.find_kind(ColumnKind::kLongitude);
    if (!lat || !lon) {
      throw Error(ErrorKind::kUsage, "geohash bins need both a latitude and a longitude column");
    }
    out.conditioning_columns = {lat->name(), lon->name()};
    const auto& lats = std::get<std::vector<double>>(lat->data());
    const auto& lons = std::get<std::vector<double>>(lon->data());
    for (std::size_t i = 0; i < table.rows(); ++i) {
      if (lat->is_na(i) || lon->is_na(i)) {
        ++out.unbinnable;
        continue;
      }
      out.codes[i] = geohash_bits(lats[i], lons[i], spec.geohash_precision);
    }
    return out;
  }

  out.conditioning_columns = {cond.name()};
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (cond.is_na(i)) {
      ++out.unbinnable;
      continue;
    }
    out.codes[i] = bin_code(cond.cell(i), spec);
  }
  return out;
}

}  // namespace stopaudit
