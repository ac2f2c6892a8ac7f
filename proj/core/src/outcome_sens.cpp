// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/outcome_sens.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "stopaudit/error.hpp"

namespace stopaudit {

namespace {

// k evenly spaced integers on [0, top] that include both ends.
std::vector<std::uint64_t> axis_levels(std::uint64_t top, std::uint64_t k) {
  std::vector<std::uint64_t> out;
  out.reserve(k);
  if (k <= 1) {
    out.push_back(0);
    return out;
  }
  // round(i * top / (k - 1)) without forming i * top
  const std::uint64_t q = top / (k - 1);
  const std::uint64_t r = top % (k - 1);
  for (std::uint64_t i = 0; i < k; ++i) {
    out.push_back(i * q + (i * r + (k - 1) / 2) / (k - 1));
  }
  return out;
}

double rate(std::uint64_t hit, std::uint64_t total) {
  return static_cast<double>(hit) / static_cast<double>(total);
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Type 7 quantile of sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double disparity_ignore_na(const RaceOutcomeCounts& counts) {
  if (counts.black_searched() == 0) {
    throw Error(ErrorKind::kDomain, "no searched Black drivers");
  }
  if (counts.white_searched() == 0) {
    throw Error(ErrorKind::kDomain, "no searched white drivers");
  }
  return rate(counts.black_hit, counts.black_searched()) -
         rate(counts.white_hit, counts.white_searched());
}

std::vector<AllocationPair> enumerate_allocations(std::uint64_t c, std::uint64_t m,
                                                  std::size_t cap) {
  if (cap < 4) throw Error(ErrorKind::kUsage, "allocation cap must be >= 4");
  const double total = (static_cast<double>(c) + 1.0) * (static_cast<double>(m) + 1.0);
  std::uint64_t ka = c + 1;
  std::uint64_t kb = m + 1;
  if (total > static_cast<double>(cap)) {
    const double ideal =
        std::sqrt(static_cast<double>(cap) * (static_cast<double>(c) + 1.0) /
                  (static_cast<double>(m) + 1.0));
    ka = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(ideal), std::min<std::uint64_t>(2, c + 1),
                                   c + 1);
    kb = std::clamp<std::uint64_t>(cap / ka, std::min<std::uint64_t>(2, m + 1), m + 1);
    if (ka * kb > cap) ka = std::max<std::uint64_t>(1, cap / kb);
  }
  const auto as = axis_levels(c, ka);
  const auto bs = axis_levels(m, kb);
  std::vector<AllocationPair> out;
  out.reserve(as.size() * bs.size());
  for (std::uint64_t a : as) {
    for (std::uint64_t b : bs) out.push_back({a, b});
  }
  return out;
}

double augmented_disparity(const RaceOutcomeCounts& k, AllocationPair alloc) {
  if (alloc.a > k.na_hit || alloc.b > k.na_miss) {
    throw Error(ErrorKind::kDomain, "allocation out of range");
  }
  const std::uint64_t black_total = k.black_searched() + alloc.a + alloc.b;
  const std::uint64_t white_total =
      k.white_searched() + (k.na_hit - alloc.a) + (k.na_miss - alloc.b);
  if (black_total == 0 || white_total == 0) {
    throw Error(ErrorKind::kDomain, "empty group after allocation");
  }
  return rate(k.black_hit + alloc.a, black_total) -
         rate(k.white_hit + (k.na_hit - alloc.a), white_total);
}

std::string_view to_string(SignClass c) {
  switch (c) {
    case SignClass::kRemainsNegative: return "remains(-)";
    case SignClass::kRemainsPositive: return "remains(+)";
    case SignClass::kNegativeToPositive: return "(-)->(+)";
    case SignClass::kPositiveToNegative: return "(+)->(-)";
    case SignClass::kBoundary: return "boundary";
    case SignClass::kExcluded: return "excluded";
  }
  return "?";
}

SignClass classify(double ignore_na, double min_disparity, double max_disparity) {
  if (ignore_na > 0.0) {
    if (min_disparity < 0.0) return SignClass::kPositiveToNegative;
    if (min_disparity > 0.0) return SignClass::kRemainsPositive;
    return SignClass::kBoundary;
  }
  if (ignore_na < 0.0) {
    if (max_disparity > 0.0) return SignClass::kNegativeToPositive;
    if (max_disparity < 0.0) return SignClass::kRemainsNegative;
    return SignClass::kBoundary;
  }
  return SignClass::kBoundary;
}

CountySensitivity county_sensitivity(const RaceOutcomeCounts& counts, std::size_t cap,
                                     bool keep_points) {
  CountySensitivity out;
  out.group_id = counts.group_id;
  out.counts = counts;
  try {
    out.ignore_na_disparity = disparity_ignore_na(counts);
  } catch (const Error& e) {
    out.classification = SignClass::kExcluded;
    out.excluded_reason = e.what();
    out.ignore_na_disparity = std::numeric_limits<double>::quiet_NaN();
    out.min_disparity = out.max_disparity = out.ignore_na_disparity;
    return out;
  }

  const std::uint64_t c = counts.na_hit;
  const std::uint64_t m = counts.na_miss;
  const auto allocs = enumerate_allocations(c, m, cap);
  const double na_total = static_cast<double>(c + m);
  out.enumerated = allocs.size();
  out.min_disparity = std::numeric_limits<double>::infinity();
  out.max_disparity = -std::numeric_limits<double>::infinity();
  if (keep_points) out.points.reserve(allocs.size());
  for (const AllocationPair& ab : allocs) {
    const double d = augmented_disparity(counts, ab);
    out.min_disparity = std::min(out.min_disparity, d);
    out.max_disparity = std::max(out.max_disparity, d);
    if (keep_points) {
      const double pw = na_total > 0
                            ? static_cast<double>((c - ab.a) + (m - ab.b)) / na_total
                            : std::numeric_limits<double>::quiet_NaN();
      out.points.push_back({ab, pw, d});
    }
  }
  out.classification = classify(out.ignore_na_disparity, out.min_disparity, out.max_disparity);
  return out;
}

StatewideSummary statewide_summary(std::span<const CountySensitivity> counties) {
  StatewideSummary s;
  s.groups = counties.size();
  for (const CountySensitivity& cs : counties) {
    if (cs.classification == SignClass::kExcluded) {
      ++s.excluded;
      continue;
    }
    if (!cs.counts.has_missingness()) continue;
    ++s.with_missingness;
    if (cs.ignore_na_disparity < 0.0) ++s.negative;
    if (cs.ignore_na_disparity > 0.0) ++s.positive;
    switch (cs.classification) {
      case SignClass::kRemainsNegative: ++s.remain_negative; break;
      case SignClass::kRemainsPositive: ++s.remain_positive; break;
      case SignClass::kNegativeToPositive: ++s.negative_to_positive; break;
      case SignClass::kPositiveToNegative: ++s.positive_to_negative; break;
      case SignClass::kBoundary: ++s.boundary; break;
      case SignClass::kExcluded: break;
    }
  }
  return s;
}

BoxSummary box_summary(const CountySensitivity& county) {
  if (county.points.empty()) throw Error(ErrorKind::kDomain, "no allocation points");
  BoxSummary out;
  out.group_id = county.group_id;

  std::vector<double> all;
  all.reserve(county.points.size());
  std::vector<std::vector<double>> by_decile(10);
  for (const SensitivityPoint& p : county.points) {
    all.push_back(p.disparity);
    if (std::isnan(p.prop_white)) continue;
    const auto d = std::min<std::size_t>(9, static_cast<std::size_t>(p.prop_white * 10.0));
    by_decile[d].push_back(p.disparity);
  }
  std::sort(all.begin(), all.end());
  out.median = quantile(all, 0.5);
  for (std::size_t d = 0; d < by_decile.size(); ++d) {
    auto& v = by_decile[d];
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    BoxBucket b;
    b.lower = static_cast<double>(d) / 10.0;
    b.upper = static_cast<double>(d + 1) / 10.0;
    b.count = v.size();
    b.min = v.front();
    b.q1 = quantile(v, 0.25);
    b.median = quantile(v, 0.5);
    b.q3 = quantile(v, 0.75);
    b.max = v.back();
    out.buckets.push_back(b);
  }
  return out;
}

OutcomeTally tally_outcome_counts(const StopTable& table, std::string_view group_by,
                                  const OutcomeColumns& cols) {
  const Column& race = table.column(cols.race);
  const Column& searched = table.column(cols.searched);
  const Column& contraband = table.column(cols.contraband);
  for (const Column* c : {&searched, &contraband}) {
    if (c->kind() != ColumnKind::kBoolean) {
      throw Error(ErrorKind::kSchema, "column \"" + c->name() + "\" must be boolean");
    }
  }
  const Column* group = group_by.empty() ? nullptr : &table.column(group_by);

  OutcomeTally tally;
  std::map<std::string, RaceOutcomeCounts> groups;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (searched.is_na(i) || !std::get<bool>(searched.cell(i))) continue;
    ++tally.searched_rows;
    std::string key = "all";
    if (group != nullptr) {
      if (group->is_na(i)) {
        ++tally.dropped_no_group;
        continue;
      }
      key = format_cell(group->cell(i));
    }
    if (contraband.is_na(i)) {
      ++tally.dropped_no_contraband;
      continue;
    }
    const bool hit = std::get<bool>(contraband.cell(i));
    RaceOutcomeCounts& g = groups[key];
    g.group_id = key;
    if (race.is_na(i)) {
      ++(hit ? g.na_hit : g.na_miss);
      continue;
    }
    const std::string label = format_cell(race.cell(i));
    if (iequals(label, cols.black_label)) {
      ++(hit ? g.black_hit : g.black_miss);
    } else if (iequals(label, cols.white_label)) {
      ++(hit ? g.white_hit : g.white_miss);
    } else {
      ++tally.other_race;
    }
  }
  tally.groups.reserve(groups.size());
  for (auto& [key, g] : groups) tally.groups.push_back(std::move(g));
  return tally;
}

}  // namespace stopaudit
