// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "stopaudit/ate_sens.hpp"
#include "stopaudit/error.hpp"

namespace stopaudit {

namespace {

const std::vector<std::string> kRaces{"black", "white", "hispanic"};
constexpr double kRaceShare[] = {0.25, 0.6, 0.15};

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return (*this)() < p; }

 private:
  std::mt19937_64 rng_;
};

void check_prob(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::kUsage, what + " must be in [0, 1]");
}

std::vector<double> standardized(std::vector<double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  for (double& x : v) x = sd > 0 ? (x - mean) / sd : 0.0;
  return v;
}

}  // namespace

std::string_view to_string(MechanismKind k) {
  switch (k) {
    case MechanismKind::kMcar: return "mcar";
    case MechanismKind::kMar: return "mar";
    case MechanismKind::kMnar: return "mnar";
  }
  return "?";
}

MechanismKind parse_mechanism(std::string_view text) {
  if (text == "mcar") return MechanismKind::kMcar;
  if (text == "mar") return MechanismKind::kMar;
  if (text == "mnar") return MechanismKind::kMnar;
  throw Error(ErrorKind::kUsage, "unknown mechanism \"" + std::string(text) + "\"");
}

void MechanismSpec::validate() const {
  const auto& cols = synth_columns();
  if (n == 0) throw Error(ErrorKind::kUsage, "n must be > 0");
  if (days < 1) throw Error(ErrorKind::kUsage, "days must be >= 1");
  switch (kind) {
    case MechanismKind::kMcar:
      check_prob(p, "p");
      break;
    case MechanismKind::kMar:
      if (driver != "date" && driver != "time") {
        throw Error(ErrorKind::kUsage, "driver must be date or time");
      }
      if (driver == target) throw Error(ErrorKind::kUsage, "driver must differ from target");
      if (!std::isfinite(intercept) || !std::isfinite(slope)) {
        throw Error(ErrorKind::kUsage, "logistic parameters must be finite");
      }
      break;
    case MechanismKind::kMnar:
      for (const auto& [race, rate] : race_rates) {
        if (std::find(kRaces.begin(), kRaces.end(), race) == kRaces.end()) {
          throw Error(ErrorKind::kUsage, "unknown race \"" + race + "\"");
        }
        check_prob(rate, "rate for " + race);
      }
      return;
  }
  if (std::find(cols.begin(), cols.end(), target) == cols.end()) {
    throw Error(ErrorKind::kUsage, "unknown target \"" + target + "\"");
  }
}

std::vector<ColumnSchema> synth_schema() {
  return {
      {"date", ColumnKind::kDate, ColumnRole::kConditioningCandidate},
      {"time", ColumnKind::kTime, ColumnRole::kConditioningCandidate},
      {"subject_race", ColumnKind::kCategory, ColumnRole::kAnalysis},
      {"searched", ColumnKind::kBoolean, ColumnRole::kAnalysis},
      {"contraband", ColumnKind::kBoolean, ColumnRole::kAnalysis},
  };
}

SynthResult generate(const MechanismSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;
  Uniform values(splitmix64(spec.seed));
  Uniform masks(splitmix64(spec.seed ^ 0x6d61736bULL));

  std::vector<Date> date(n);
  std::vector<TimeOfDay> time(n);
  CategoryData race{std::vector<std::uint32_t>(n), kRaces};
  std::vector<std::uint8_t> searched(n), contraband(n);
  for (std::size_t i = 0; i < n; ++i) {
    date[i] = spec.start + std::chrono::days{static_cast<long>(i * static_cast<std::size_t>(spec.days) / n)};
    time[i].seconds = static_cast<std::int32_t>(values() * 86400.0);
    const double u = values();
    race.codes[i] = u < kRaceShare[0] ? 0 : u < kRaceShare[0] + kRaceShare[1] ? 1 : 2;
    searched[i] = values.bernoulli(race.codes[i] == 0 ? 0.08 : 0.05);
    contraband[i] = searched[i] && values.bernoulli(0.3);
  }

  // Mask probabilities per row, then one draw per row.
  std::vector<double> prob(n, 0.0);
  std::string target = spec.target;
  switch (spec.kind) {
    case MechanismKind::kMcar:
      std::fill(prob.begin(), prob.end(), spec.p);
      break;
    case MechanismKind::kMar: {
      std::vector<double> driver(n);
      for (std::size_t i = 0; i < n; ++i) {
        driver[i] = spec.driver == "date" ? static_cast<double>(date[i].time_since_epoch().count())
                                          : static_cast<double>(time[i].seconds);
      }
      const auto z = standardized(std::move(driver));
      for (std::size_t i = 0; i < n; ++i) {
        prob[i] = 1.0 / (1.0 + std::exp(-(spec.intercept + spec.slope * z[i])));
      }
      break;
    }
    case MechanismKind::kMnar:
      target = "subject_race";
      for (std::size_t i = 0; i < n; ++i) {
        const auto it = spec.race_rates.find(kRaces[race.codes[i]]);
        prob[i] = it == spec.race_rates.end() ? 0.0 : it->second;
      }
      break;
  }
  std::vector<std::uint8_t> mask(n);
  for (std::size_t i = 0; i < n; ++i) mask[i] = masks.bernoulli(prob[i]);

  const auto schema = synth_schema();
  const std::vector<std::uint8_t> none(n, 0);
  auto build = [&](bool apply) {
    std::vector<std::shared_ptr<const Column>> cols;
    for (const ColumnSchema& s : schema) {
      const bool masked = apply && s.name == target;
      const std::vector<std::uint8_t>& na = masked ? mask : none;
      auto blank = [&](auto v) {
        if (masked) {
          for (std::size_t i = 0; i < n; ++i) {
            if (na[i]) v[i] = {};
          }
        }
        return v;
      };
      ColumnData data;
      if (s.name == "date") data = blank(date);
      if (s.name == "time") data = blank(time);
      if (s.name == "subject_race") data = CategoryData{blank(race.codes), race.levels};
      if (s.name == "searched") data = blank(searched);
      if (s.name == "contraband") data = blank(contraband);
      cols.push_back(std::make_shared<const Column>(s, std::move(data), na));
    }
    return StopTable(std::move(cols));
  };
  return {build(true), build(false)};
}

}  // namespace stopaudit
