// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "stopaudit/ate_sens.hpp"
#include "stopaudit/binning.hpp"
#include "stopaudit/maxcorr.hpp"
#include "stopaudit/missingness.hpp"
#include "stopaudit/outcome_sens.hpp"
#include "stopaudit/report.hpp"
#include "stopaudit/synth.hpp"

using namespace stopaudit;

namespace {

StopTable synth_table(std::size_t n) {
  MechanismSpec spec;
  spec.p = 0.2;
  spec.n = n;
  spec.seed = 1;
  return generate(spec).masked;
}

const std::string& synth_file(std::size_t n) {
  static std::map<std::size_t, std::string> paths;
  auto& p = paths[n];
  if (p.empty()) {
    p = (std::filesystem::temp_directory_path() / ("stopaudit_bench_" + std::to_string(n) + ".csv"))
            .string();
    std::ofstream out(p);
    write_table_csv(synth_table(n), out);
  }
  return p;
}

void BM_LoadTable(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::string& path = synth_file(n);
  const auto schema = synth_schema();
  for (auto _ : state) benchmark::DoNotOptimize(load_table(path, schema));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LoadTable)->Arg(10'000)->Arg(200'000)->Unit(benchmark::kMillisecond);

void BM_DatasetCmrByWeek(benchmark::State& state) {
  const StopTable t = synth_table(static_cast<std::size_t>(state.range(0)));
  const std::vector<std::string> vars{"time", "subject_race", "searched", "contraband"};
  for (auto _ : state) benchmark::DoNotOptimize(cmr_all(t, "date", {BinKind::kWeek}, vars));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DatasetCmrByWeek)->Arg(10'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_MaximalCorrelation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = nd(rng);
    y[i] = std::sin(x[i]) + nd(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(maximal_correlation(x, y));
}
BENCHMARK(BM_MaximalCorrelation)->Arg(50)->Arg(1000)->Arg(20'000)->Unit(benchmark::kMicrosecond);

void BM_CountySensitivity(benchmark::State& state) {
  const RaceOutcomeCounts k{"Belmont", 45, 170, 286, 1726, 4, 643};
  for (auto _ : state) benchmark::DoNotOptimize(county_sensitivity(k));
}
BENCHMARK(BM_CountySensitivity)->Unit(benchmark::kMicrosecond);

void BM_CappedEnumeration(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_allocations(5000, 90'000));
}
BENCHMARK(BM_CappedEnumeration)->Unit(benchmark::kMillisecond);

void BM_AteSweep(benchmark::State& state) {
  const StopSearchCounts k{400, 4000, 600, 12000, 90, 1500};
  const auto plans = default_plans(kDefaultProportions);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ate_sensitivity_run(k, kDefaultRhos, plans, 100, 7));
  }
}
BENCHMARK(BM_AteSweep)->Unit(benchmark::kMicrosecond);

void BM_Geohash(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  std::vector<std::pair<double, double>> pts(4096);
  for (auto& p : pts) p = {lat(rng), lon(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = pts[i++ & 4095];
    benchmark::DoNotOptimize(geohash_encode(p.first, p.second, 6));
  }
}
BENCHMARK(BM_Geohash);

}  // namespace

BENCHMARK_MAIN();
