// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/ate_sens.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "stopaudit/error.hpp"

namespace stopaudit {

namespace {

void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorKind::kDomain, std::string(what) + " must be in [0, 1]");
  }
}

std::uint64_t round_share(double p, std::uint64_t n) {
  return std::min<std::uint64_t>(n, static_cast<std::uint64_t>(std::llround(p * static_cast<double>(n))));
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Moves `stops` NA stops carrying `searched` searches to white and the rest
// to Black.
StopSearchCounts split_na(const StopSearchCounts& in, std::uint64_t stops, std::uint64_t searched) {
  StopSearchCounts out = in;
  out.white_stops += stops;
  out.white_searched += searched;
  out.black_stops += in.na_stops - stops;
  out.black_searched += in.na_searched - searched;
  out.na_stops = 0;
  out.na_searched = 0;
  return out;
}

}  // namespace

void StopSearchCounts::validate() const {
  if (black_searched > black_stops || white_searched > white_stops || na_searched > na_stops) {
    throw Error(ErrorKind::kDomain, "searched count exceeds stops");
  }
}

std::string_view to_string(Estimand e) {
  return e == Estimand::kPooled ? "pooled" : "black-stops";
}

Estimand parse_estimand(std::string_view text) {
  if (text == "pooled") return Estimand::kPooled;
  if (text == "black-stops") return Estimand::kBlackStops;
  throw Error(ErrorKind::kUsage, "unknown estimand \"" + std::string(text) + "\"");
}

double naive_search_disparity(const StopSearchCounts& k) {
  k.validate();
  if (k.black_stops == 0) throw Error(ErrorKind::kDomain, "no Black stops");
  if (k.white_stops == 0) throw Error(ErrorKind::kDomain, "no white stops");
  return static_cast<double>(k.black_searched) / static_cast<double>(k.black_stops) -
         static_cast<double>(k.white_searched) / static_cast<double>(k.white_stops);
}

Interval feasible_counterfactual_rate(double p1, double rho) {
  require_unit(p1, "p1");
  require_unit(rho, "rho");
  // p1 = (1 - rho) a + rho s with a, s in [0, 1]; s is the racially stopped
  // stratum's mean, so 0 <= p1 - (1 - rho) a <= rho.
  const double k = 1.0 - rho;
  if (k == 0.0) return {0.0, 1.0};
  return {std::max(0.0, (p1 - rho) / k), std::min(1.0, p1 / k)};
}

BoundsResult sharp_ate_bounds(double p1, double p0, double pi, double rho) {
  require_unit(p0, "p0");
  require_unit(pi, "pi");
  const Interval a = feasible_counterfactual_rate(p1, rho);
  // The objective is linear in a, so its extremes sit on the interval ends.
  const double black_term = pi * (p1 - (1.0 - rho) * p0);
  const auto objective = [&](double av) { return black_term + (1.0 - pi) * (av - p0); };
  const double at_lo = objective(a.lo);
  const double at_hi = objective(a.hi);
  BoundsResult r;
  r.rho = rho;
  r.naive = p1 - p0;
  r.pi = pi;
  r.lower = std::min(at_lo, at_hi);
  r.upper = std::max(at_lo, at_hi);
  return r;
}

BoundsResult sharp_ate_bounds(const StopSearchCounts& counts, double rho, Estimand estimand) {
  const double naive = naive_search_disparity(counts);
  const double p1 = static_cast<double>(counts.black_searched) / static_cast<double>(counts.black_stops);
  const double p0 = static_cast<double>(counts.white_searched) / static_cast<double>(counts.white_stops);
  const double pi = estimand == Estimand::kBlackStops
                        ? 1.0
                        : static_cast<double>(counts.black_stops) /
                              static_cast<double>(counts.black_stops + counts.white_stops);
  BoundsResult r = sharp_ate_bounds(p1, p0, pi, rho);
  r.naive = naive;
  return r;
}

void AugmentationPlan::validate() const {
  if (!(p_white >= 0.0 && p_white <= 1.0)) {
    throw Error(ErrorKind::kUsage, "p_white must be in [0, 1]");
  }
}

std::string AugmentationPlan::label() const {
  switch (kind) {
    case PlanKind::kIgnoreNa: return "ignore_na";
    case PlanKind::kProportion: return "proportion";
    case PlanKind::kRandom: return "random";
    case PlanKind::kExtremeToBlack: return "extreme_to_black";
    case PlanKind::kExtremeToWhite: return "extreme_to_white";
  }
  return "?";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_sub_seed(std::uint64_t seed, std::uint64_t plan_index, std::uint64_t draw) {
  return splitmix64(splitmix64(seed ^ splitmix64(plan_index)) + draw);
}

std::uint64_t sample_hypergeometric(std::uint64_t total, std::uint64_t marked,
                                    std::uint64_t draws, std::uint64_t seed) {
  if (marked > total || draws > total) {
    throw Error(ErrorKind::kDomain, "hypergeometric parameters out of range");
  }
  // Drawing the complement is the same experiment and is cheaper past half.
  const bool flip = draws > total / 2;
  const std::uint64_t k = flip ? total - draws : draws;
  std::mt19937_64 rng(seed);
  std::uint64_t left = total;
  std::uint64_t marked_left = marked;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < k; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u * static_cast<double>(left) < static_cast<double>(marked_left)) {
      ++hits;
      --marked_left;
    }
    --left;
  }
  return flip ? marked - hits : hits;
}

StopSearchCounts apply_augmentation(const StopSearchCounts& counts, const AugmentationPlan& plan) {
  plan.validate();
  counts.validate();
  const std::uint64_t n = counts.na_stops;
  const std::uint64_t s = counts.na_searched;
  switch (plan.kind) {
    case PlanKind::kIgnoreNa:
      return counts;
    case PlanKind::kProportion: {
      const std::uint64_t stops = round_share(plan.p_white, n);
      const std::uint64_t lo = stops > n - s ? stops - (n - s) : 0;
      const std::uint64_t searched = std::clamp(round_share(plan.p_white, s), lo, std::min(s, stops));
      return split_na(counts, stops, searched);
    }
    case PlanKind::kRandom: {
      const std::uint64_t stops = round_share(plan.p_white, n);
      return split_na(counts, stops, sample_hypergeometric(n, s, stops, plan.seed));
    }
    case PlanKind::kExtremeToBlack:
      return split_na(counts, n - s, 0);
    case PlanKind::kExtremeToWhite:
      return split_na(counts, s, s);
  }
  return counts;
}

std::vector<AteRow> ate_sensitivity_run(const StopSearchCounts& counts, std::span<const double> rhos,
                                        std::span<const AugmentationPlan> plans, std::uint64_t draws,
                                        std::uint64_t seed, Estimand estimand) {
  for (double rho : rhos) require_unit(rho, "rho");
  std::vector<AteRow> out;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const bool random = plans[i].kind == PlanKind::kRandom;
    const std::uint64_t reps = random ? draws : 1;
    for (std::uint64_t d = 0; d < reps; ++d) {
      AugmentationPlan plan = plans[i];
      if (random) plan.seed = derive_sub_seed(seed, i, d);
      const StopSearchCounts aug = apply_augmentation(counts, plan);
      for (double rho : rhos) {
        out.push_back({plan, d, aug, sharp_ate_bounds(aug, rho, estimand)});
      }
    }
  }
  return out;
}

std::vector<AugmentationPlan> default_plans(std::span<const double> proportions) {
  std::vector<AugmentationPlan> plans;
  plans.push_back({PlanKind::kIgnoreNa, 0.0, 0});
  plans.push_back({PlanKind::kExtremeToBlack, 0.0, 0});
  plans.push_back({PlanKind::kExtremeToWhite, 0.0, 0});
  for (double p : proportions) {
    AugmentationPlan plan{PlanKind::kRandom, p, 0};
    plan.validate();
    plans.push_back(plan);
  }
  return plans;
}

StopSearchCounts tally_stop_counts(const StopTable& table, const StopColumns& cols) {
  const Column& race = table.column(cols.race);
  const Column& searched = table.column(cols.searched);
  if (searched.kind() != ColumnKind::kBoolean) {
    throw Error(ErrorKind::kSchema, "column \"" + searched.name() + "\" must be boolean");
  }
  StopSearchCounts k;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (searched.is_na(i)) continue;
    const bool s = std::get<bool>(searched.cell(i));
    if (race.is_na(i)) {
      ++k.na_stops;
      k.na_searched += s;
      continue;
    }
    const std::string label = format_cell(race.cell(i));
    if (iequals(label, cols.black_label)) {
      ++k.black_stops;
      k.black_searched += s;
    } else if (iequals(label, cols.white_label)) {
      ++k.white_stops;
      k.white_searched += s;
    }
  }
  return k;
}

}  // namespace stopaudit
