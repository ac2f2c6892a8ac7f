// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stopaudit/ate_sens.hpp"
#include "stopaudit/binning.hpp"
#include "stopaudit/ingest.hpp"
#include "stopaudit/maxcorr.hpp"
#include "stopaudit/missingness.hpp"
#include "stopaudit/outcome_sens.hpp"
#include "stopaudit/synth.hpp"

namespace stopaudit {

// ---- emitters. Every file is RFC-4180 CSV or JSON with no timestamps.

// All columns, NA as "NA".
void write_table_csv(const StopTable& table, std::ostream& out);

// bin,target,rate,count for the dataset series then each variable.
void write_audit_csv(const AuditSeries& series, std::ostream& out);

// group,a,b,prop_white,disparity
void write_outcome_points_csv(std::span<const CountySensitivity> counties, std::ostream& out);

// One row per group: counts, ignore-NA, min, max, classification, reason.
void write_outcome_groups_csv(std::span<const CountySensitivity> counties, std::ostream& out);

// Statewide tally columns plus boundary, excluded and group totals.
void write_outcome_summary_csv(const StatewideSummary& s, std::ostream& out);

// group,lower,upper,count,min,q1,median,q3,max with an "all" bucket row.
void write_box_csv(std::span<const BoxSummary> boxes, std::ostream& out);

// plan,p_white,draw,rho,naive,lower,upper
void write_ate_csv(std::span<const AteRow> rows, std::ostream& out);

// Ribbon layout: one panel per rho with a zero reference line.
std::string ate_ribbon_json(std::span<const AteRow> rows, Estimand estimand);

// ---- count files

// Header group,black_hit,black_miss,white_hit,white_miss,na_hit,na_miss.
std::vector<RaceOutcomeCounts> read_outcome_counts(const std::string& path);

// Header black_searched,black_stops,white_searched,white_stops,na_searched,
// na_stops with exactly one data row.
StopSearchCounts read_stop_counts(const std::string& path);

// ---- pipeline

enum class Command { kAudit, kOutcomeSens, kAteSens, kSynth };

std::string_view to_string(Command c);
Command parse_command(std::string_view text);

// Dataset config plus the column names the sensitivity commands read. Extra
// JSON keys: race_column, search_column, contraband_column, black_label,
// white_label.
struct AnalysisConfig {
  DatasetConfig dataset;
  OutcomeColumns outcome;
  StopColumns stops;
};

AnalysisConfig parse_analysis_config(std::string_view json_text);

struct AuditOptions {
  std::string input;
  std::string cond;
  BinSpec spec;
  std::vector<std::string> variables;  // empty selects the defaults
  AceConfig ace;
};

struct OutcomeOptions {
  std::string input;   // stop table, or
  std::string counts;  // count file
  std::string group_by;
  std::size_t cap = kDefaultAllocationCap;
};

struct AteOptions {
  std::string input;   // stop table, or
  std::string counts;  // count file
  std::vector<double> rhos{std::begin(kDefaultRhos), std::end(kDefaultRhos)};
  std::vector<double> proportions{std::begin(kDefaultProportions), std::end(kDefaultProportions)};
  std::uint64_t draws = 10;
  Estimand estimand = Estimand::kPooled;
};

struct SynthOptions {
  MechanismSpec spec;
  std::string out;  // masked CSV; the shadow goes next to it
};

using CommandOptions = std::variant<AuditOptions, OutcomeOptions, AteOptions, SynthOptions>;

struct PipelineRequest {
  std::string config_path;  // may be empty when the command needs none
  std::string out_dir;
  std::uint64_t seed = 0;
  CommandOptions options;
};

struct RunManifest {
  std::string dataset_id;
  std::string config_digest;  // SHA-256 of config bytes and options
  std::uint64_t seed = 0;
  std::string command;
  std::vector<std::string> outputs;
  std::map<std::string, double> timings_ms;
  bool exclusion_only = false;  // every analysed group was excluded
  std::vector<std::string> messages;  // one line per reported result

  std::string to_json() const;
};

std::string sha256_hex(std::string_view bytes);

// Runs one command, writes its outputs and manifest.json into out_dir and
// returns the manifest. Throws Error for config, IO and usage problems.
RunManifest run_pipeline(const PipelineRequest& request);

}  // namespace stopaudit
