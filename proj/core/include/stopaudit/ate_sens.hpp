// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stopaudit/ingest.hpp"

namespace stopaudit {

// Recorded stops and searches by race. The na_* fields hold stops whose
// race is NA.
struct StopSearchCounts {
  std::uint64_t black_searched = 0;
  std::uint64_t black_stops = 0;
  std::uint64_t white_searched = 0;
  std::uint64_t white_stops = 0;
  std::uint64_t na_searched = 0;
  std::uint64_t na_stops = 0;

  // Throws Error(kDomain) when searched exceeds stops in any group.
  void validate() const;
  friend bool operator==(const StopSearchCounts&, const StopSearchCounts&) = default;
};

// Which stopped population the disparity averages over.
//   kPooled: Black and white stops, weighted by their share.
//   kBlackStops: Black stops only (pi = 1).
enum class Estimand { kPooled, kBlackStops };

std::string_view to_string(Estimand e);
Estimand parse_estimand(std::string_view text);

struct BoundsResult {
  double rho = 0.0;
  double naive = 0.0;  // p1 - p0
  double lower = 0.0;
  double upper = 0.0;
  double pi = 0.0;     // Black share of the averaged population
};

// p1 - p0. Throws Error(kDomain) when either group has no stops.
double naive_search_disparity(const StopSearchCounts& counts);

// Closed interval of the white stops' as-if-Black search rate a that is
// consistent with p1 at the given rho.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval feasible_counterfactual_rate(double p1, double rho);

// Sharp bounds from rates. Requires p1, p0, pi, rho in [0, 1].
BoundsResult sharp_ate_bounds(double p1, double p0, double pi, double rho);

// Sharp bounds from counts; pi follows the estimand.
BoundsResult sharp_ate_bounds(const StopSearchCounts& counts, double rho,
                              Estimand estimand = Estimand::kPooled);

enum class PlanKind {
  kIgnoreNa,
  kProportion,      // deterministic pro-rata split of NA stops
  kRandom,          // NA stops drawn without replacement
  kExtremeToBlack,  // NA searched to Black, NA unsearched to white
  kExtremeToWhite,  // the mirror image
};

struct AugmentationPlan {
  PlanKind kind = PlanKind::kIgnoreNa;
  double p_white = 0.0;  // share of NA stops assigned to white
  std::uint64_t seed = 0;

  // Throws Error(kUsage) when p_white is outside [0, 1].
  void validate() const;
  std::string label() const;
};

// Moves every NA stop into the Black or white group per the plan. With
// kProportion, round(p_white * na_stops) stops go to white and carry
// round(p_white * na_searched) searches. With kRandom, the same number of
// stops is drawn without replacement, so the searches they carry are
// hypergeometric.
StopSearchCounts apply_augmentation(const StopSearchCounts& counts, const AugmentationPlan& plan);

// Hypergeometric draw: searched rows among `draws` rows sampled without
// replacement from `total` rows of which `marked` are searched.
std::uint64_t sample_hypergeometric(std::uint64_t total, std::uint64_t marked,
                                    std::uint64_t draws, std::uint64_t seed);

// Seed of draw `draw` of plan `plan_index`:
// splitmix64(splitmix64(seed ^ splitmix64(plan_index)) + draw).
std::uint64_t derive_sub_seed(std::uint64_t seed, std::uint64_t plan_index, std::uint64_t draw);

std::uint64_t splitmix64(std::uint64_t x);

struct AteRow {
  AugmentationPlan plan;
  std::uint64_t draw = 0;
  StopSearchCounts augmented;
  BoundsResult bounds;
};

// For every plan (random ones repeated `draws` times with derived seeds)
// and every rho: augmented counts, naive disparity and sharp bounds.
std::vector<AteRow> ate_sensitivity_run(const StopSearchCounts& counts, std::span<const double> rhos,
                                        std::span<const AugmentationPlan> plans, std::uint64_t draws,
                                        std::uint64_t seed, Estimand estimand = Estimand::kPooled);

// ignore_na, both extremes and one random plan per proportion.
std::vector<AugmentationPlan> default_plans(std::span<const double> proportions);

inline constexpr double kDefaultRhos[] = {0.25, 0.5, 0.75};
inline constexpr double kDefaultProportions[] = {0.0, 0.25, 0.5, 0.75, 1.0};

struct StopColumns {
  std::string race = "subject_race";
  std::string searched = "search_conducted";
  std::string black_label = "black";
  std::string white_label = "white";
};

// Counts stops with a known search outcome. Other races are skipped.
StopSearchCounts tally_stop_counts(const StopTable& table, const StopColumns& cols = {});

}  // namespace stopaudit
