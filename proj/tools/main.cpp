// SPDX-License-Identifier: Apache-2.0
//
// stopaudit: missingness audits and race-imputation sensitivity runs over
// stop-record tables.
//
// Exit codes: 0 success, 1 every group excluded, 2 usage, 3 IO/config.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stopaudit/error.hpp"
#include "stopaudit/report.hpp"

namespace sa = stopaudit;

namespace {

int exit_code(sa::ErrorKind kind) {
  switch (kind) {
    case sa::ErrorKind::kUsage: return 2;
    case sa::ErrorKind::kDomain: return 1;
    case sa::ErrorKind::kIo:
    case sa::ErrorKind::kSchema:
    case sa::ErrorKind::kData: return 3;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Missingness audits and race-imputation sensitivity for stop records"};
  app.require_subcommand(1);

  sa::PipelineRequest req;
  app.add_option("--config", req.config_path, "dataset config (JSON)");
  app.add_option("--out", req.out_dir, "output directory");
  app.add_option("--seed", req.seed, "run seed");

  sa::AuditOptions audit;
  std::string bin_kind = "day";
  std::string selection = "penalized";
  auto* a = app.add_subcommand("audit", "CMR and dCMR series with maximal correlation");
  a->add_option("--input", audit.input, "stop table CSV")->required();
  a->add_option("--cond", audit.cond, "conditioning variable")->required();
  a->add_option("--bin", bin_kind, "day|week|hour|geohash");
  a->add_option("--geohash-precision", audit.spec.geohash_precision, "geohash length");
  a->add_option("--variables", audit.variables, "variables averaged into the dCMR")
      ->delimiter(',');
  a->add_option("--smoother-bins", audit.ace.smoother_bins, "maximum smoother bins (0 = auto)");
  a->add_option("--bin-selection", selection, "penalized|fixed");

  sa::OutcomeOptions outcome;
  auto* o = app.add_subcommand("outcome-sens", "outcome-test disparity over NA allocations");
  o->add_option("--input", outcome.input, "stop table CSV");
  o->add_option("--counts", outcome.counts, "per-group count CSV");
  o->add_option("--group-by", outcome.group_by, "grouping column");
  o->add_option("--cap", outcome.cap, "maximum allocations per group");

  sa::AteOptions ate;
  std::string estimand = "pooled";
  auto* t = app.add_subcommand("ate-sens", "sharp search ATE bounds under NA augmentations");
  t->add_option("--input", ate.input, "stop table CSV");
  t->add_option("--counts", ate.counts, "one-row count CSV");
  t->add_option("--rhos", ate.rhos, "share of racially motivated stops")->delimiter(',');
  t->add_option("--props", ate.proportions, "shares of NA stops assigned to white")
      ->delimiter(',');
  t->add_option("--draws", ate.draws, "random draws per proportion");
  t->add_option("--estimand", estimand, "pooled|black-stops");

  sa::SynthOptions synth;
  std::string mechanism = "mcar";
  std::vector<std::string> rates;
  auto* s = app.add_subcommand("synth", "synthetic stop table with a known mechanism");
  s->add_option("--mechanism", mechanism, "mcar|mar|mnar");
  s->add_option("--out", synth.out, "masked CSV path")->required();
  s->add_option("--target", synth.spec.target, "masked column (mcar, mar)");
  s->add_option("--p", synth.spec.p, "mcar mask probability");
  s->add_option("--driver", synth.spec.driver, "mar driver: date|time");
  s->add_option("--intercept", synth.spec.intercept, "mar logistic intercept");
  s->add_option("--slope", synth.spec.slope, "mar logistic slope");
  s->add_option("--rates", rates, "mnar mask rate per race, e.g. black=0.4,white=0.1")
      ->delimiter(',');
  s->add_option("--n", synth.spec.n, "rows");
  s->add_option("--days", synth.spec.days, "days covered");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*a) {
      audit.spec.kind = sa::parse_bin_kind(bin_kind);
      audit.spec.validate();
      if (selection == "fixed") {
        audit.ace.selection = sa::BinSelection::kFixed;
      } else if (selection != "penalized") {
        throw sa::Error(sa::ErrorKind::kUsage, "unknown bin selection \"" + selection + "\"");
      }
      req.options = audit;
    } else if (*o) {
      req.options = outcome;
    } else if (*t) {
      ate.estimand = sa::parse_estimand(estimand);
      req.options = ate;
    } else {
      synth.spec.kind = sa::parse_mechanism(mechanism);
      for (const auto& kv : rates) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
          throw sa::Error(sa::ErrorKind::kUsage, "--rates expects race=rate, got \"" + kv + "\"");
        }
        try {
          synth.spec.race_rates[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
          throw sa::Error(sa::ErrorKind::kUsage, "bad rate in \"" + kv + "\"");
        }
      }
      if (req.out_dir.empty()) {
        const auto parent = std::filesystem::path(synth.out).parent_path();
        req.out_dir = parent.empty() ? "." : parent.string();
      }
      req.options = synth;
    }
    const sa::RunManifest m = sa::run_pipeline(req);
    for (const auto& line : m.messages) std::cout << line << '\n';
    std::cout << "manifest: " << m.outputs.back() << '\n';
    return m.exclusion_only ? 1 : 0;
  } catch (const sa::Error& e) {
    std::cerr << "stopaudit: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "stopaudit: " << e.what() << '\n';
    return 3;
  }
}
