// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stopaudit/ingest.hpp"

namespace stopaudit {

// Searched drivers of one group split by race and contraband outcome.
// na_hit and na_miss are searched drivers whose race is NA.
struct RaceOutcomeCounts {
  std::string group_id;
  std::uint64_t black_hit = 0;
  std::uint64_t black_miss = 0;
  std::uint64_t white_hit = 0;
  std::uint64_t white_miss = 0;
  std::uint64_t na_hit = 0;
  std::uint64_t na_miss = 0;

  std::uint64_t black_searched() const { return black_hit + black_miss; }
  std::uint64_t white_searched() const { return white_hit + white_miss; }
  bool has_missingness() const { return na_hit + na_miss > 0; }
};

// a NA hits and b NA misses go to Black; the rest go to white.
struct AllocationPair {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  friend bool operator==(AllocationPair, AllocationPair) = default;
};

inline constexpr std::size_t kDefaultAllocationCap = 1'000'000;

// Black hit rate minus white hit rate. Throws Error(kDomain) when either
// group has no searched drivers.
double disparity_ignore_na(const RaceOutcomeCounts& counts);

// Every (a, b) with 0 <= a <= c and 0 <= b <= m, a-major. When (c+1)(m+1)
// exceeds cap, a uniform grid over each axis that keeps both ends of each
// axis and has at most cap points. Throws Error(kUsage) if cap < 4.
std::vector<AllocationPair> enumerate_allocations(std::uint64_t c, std::uint64_t m,
                                                  std::size_t cap = kDefaultAllocationCap);

// Disparity after allocating NA observations per alloc. Throws
// Error(kDomain) for an out-of-range allocation or an empty group.
double augmented_disparity(const RaceOutcomeCounts& counts, AllocationPair alloc);

enum class SignClass {
  kRemainsNegative,
  kRemainsPositive,
  kNegativeToPositive,  // ignore-NA < 0 and some allocation > 0
  kPositiveToNegative,  // ignore-NA > 0 and some allocation < 0
  kBoundary,            // an exact zero decides the class
  kExcluded,
};

std::string_view to_string(SignClass c);

struct SensitivityPoint {
  AllocationPair alloc;
  double prop_white = 0.0;  // NaN when the group has no NA observations
  double disparity = 0.0;
};

struct CountySensitivity {
  std::string group_id;
  RaceOutcomeCounts counts;
  double ignore_na_disparity = 0.0;
  double min_disparity = 0.0;
  double max_disparity = 0.0;
  SignClass classification = SignClass::kExcluded;
  std::string excluded_reason;  // set iff classification == kExcluded
  std::size_t enumerated = 0;
  std::vector<SensitivityPoint> points;  // empty unless requested
};

// Scans the enumeration and classifies by the ignore-NA sign first. Groups
// failing the ignore-NA precondition come back kExcluded, not thrown.
CountySensitivity county_sensitivity(const RaceOutcomeCounts& counts,
                                     std::size_t cap = kDefaultAllocationCap,
                                     bool keep_points = false);

SignClass classify(double ignore_na, double min_disparity, double max_disparity);

// Statewide tally. Sign and switch tallies count groups with missingness
// only; boundary and excluded groups are reported beside them.
struct StatewideSummary {
  std::size_t with_missingness = 0;
  std::size_t negative = 0;
  std::size_t positive = 0;
  std::size_t negative_to_positive = 0;
  std::size_t positive_to_negative = 0;
  std::size_t remain_negative = 0;
  std::size_t remain_positive = 0;
  std::size_t boundary = 0;
  std::size_t excluded = 0;
  std::size_t groups = 0;
};

StatewideSummary statewide_summary(std::span<const CountySensitivity> counties);

struct BoxBucket {
  double lower = 0.0;  // prop_white range [lower, upper), last bucket closed
  double upper = 0.0;
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct BoxSummary {
  std::string group_id;
  double median = 0.0;  // over every point
  std::vector<BoxBucket> buckets;  // non-empty deciles of prop_white
};

// Needs the county's points. Throws Error(kDomain) when there are none.
BoxSummary box_summary(const CountySensitivity& county);

// Column names and labels used to read outcome counts from a table.
struct OutcomeColumns {
  std::string race = "subject_race";
  std::string searched = "search_conducted";
  std::string contraband = "contraband_found";
  std::string black_label = "black";
  std::string white_label = "white";
};

struct OutcomeTally {
  std::vector<RaceOutcomeCounts> groups;  // ordered by group id
  std::size_t searched_rows = 0;
  std::size_t dropped_no_group = 0;       // group value NA
  std::size_t dropped_no_contraband = 0;  // contraband NA
  std::size_t other_race = 0;             // searched rows of other races
};

// Tallies searched rows. With an empty group_by everything lands in one
// group named "all".
OutcomeTally tally_outcome_counts(const StopTable& table, std::string_view group_by,
                                  const OutcomeColumns& cols = {});

}  // namespace stopaudit
