// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stopaudit/ingest.hpp"

namespace stopaudit {

enum class MechanismKind { kMcar, kMar, kMnar };

std::string_view to_string(MechanismKind k);
MechanismKind parse_mechanism(std::string_view text);

// Missingness mechanism plus table size.
//   mcar: each target cell masked independently with probability p.
//   mar: target masked with probability logistic(intercept + slope * z),
//     z the standardized driver column (date or time), which stays observed.
//   mnar: subject_race masked with a rate that depends on the true race.
struct MechanismSpec {
  MechanismKind kind = MechanismKind::kMcar;
  std::string target = "subject_race";
  double p = 0.0;
  std::string driver = "date";
  double intercept = 0.0;
  double slope = 0.0;
  std::map<std::string, double> race_rates;  // mnar; missing races are 0
  std::size_t n = 10000;
  int days = 350;  // dates spread evenly over this many days
  std::chrono::sys_days start = std::chrono::sys_days{std::chrono::year{2018} / 1 / 1};
  std::uint64_t seed = 0;

  // Throws Error(kUsage) for a probability outside [0, 1], an unknown
  // target or driver, or a driver equal to the target.
  void validate() const;
};

// Complete values, in order: date, time, subject_race (black, white,
// hispanic at 0.25/0.6/0.15), searched (probability 0.08 Black, 0.05
// otherwise) and contraband (0.3 among searched, false otherwise).
inline const std::vector<std::string>& synth_columns() {
  static const std::vector<std::string> names{"date", "time", "subject_race", "searched",
                                              "contraband"};
  return names;
}

std::vector<ColumnSchema> synth_schema();

struct SynthResult {
  StopTable masked;
  StopTable shadow;  // same rows, nothing masked
};

SynthResult generate(const MechanismSpec& spec);

}  // namespace stopaudit
