// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/report.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "stopaudit/csv.hpp"
#include "stopaudit/error.hpp"
#include "stopaudit/svg.hpp"

namespace stopaudit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) { return csv::format_double(v); }

// NaN has no JSON spelling; it goes out as null.
json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

std::uint64_t parse_count(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorKind::kData, what + " is not a non-negative integer: \"" + s + "\"");
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << bytes;
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

template <typename F>
void write_with(const fs::path& path, F&& body) {
  std::ostringstream ss;
  body(ss);
  write_file(path, ss.str());
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json bin_spec_json(const BinSpec& s) {
  json j{{"kind", std::string(to_string(s.kind))}};
  if (s.kind == BinKind::kGeohash) j["geohash_precision"] = s.geohash_precision;
  return j;
}

MaxCorrResult series_score(const CMRSeries& series, const AceConfig& ace) {
  try {
    return series.spec.kind == BinKind::kGeohash ? latlon_maxcorr(series, ace)
                                                 : series_maxcorr(series, ace);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDomain) throw;
    MaxCorrResult r;
    r.na = true;
    r.value = std::nan("");
    r.reason = e.what();
    return r;
  }
}

json series_json(const CMRSeries& s, const MaxCorrResult& mc) {
  json j{{"target", s.target},
         {"bins", s.points.size()},
         {"maxcorr", mc.na ? json(nullptr) : json(mc.value)},
         {"iterations", mc.iterations_used},
         {"converged", mc.converged}};
  if (mc.na) j["maxcorr_reason"] = mc.reason;
  return j;
}

std::string label_of(const CMRSeries& s, const MaxCorrResult& mc) {
  std::ostringstream os;
  os << s.target << " (";
  if (mc.na) {
    os << "NA: " << mc.reason;
  } else {
    os << std::fixed << std::setprecision(3) << mc.value;
  }
  os << ')';
  return os.str();
}

struct Loaded {
  AnalysisConfig config;
  std::string bytes;
};

Loaded load_config(const std::string& path, bool required) {
  Loaded l;
  if (path.empty()) {
    if (required) throw Error(ErrorKind::kUsage, "--config is required for this command");
    return l;
  }
  l.bytes = read_file(path);
  l.config = parse_analysis_config(l.bytes);
  return l;
}

StopTable load_input(const Loaded& cfg, const std::string& input) {
  if (cfg.config.dataset.columns.empty()) {
    throw Error(ErrorKind::kSchema, "config lists no columns");
  }
  return load_table(input, cfg.config.dataset.columns, cfg.config.dataset.options);
}

json options_json(const CommandOptions& options) {
  struct Visitor {
    json operator()(const AuditOptions& o) const {
      return {{"input", o.input},
              {"cond", o.cond},
              {"bin", bin_spec_json(o.spec)},
              {"variables", o.variables},
              {"ace",
               {{"max_iterations", o.ace.max_iterations},
                {"tolerance", o.ace.tolerance},
                {"smoother_bins", o.ace.smoother_bins},
                {"bin_penalty", o.ace.bin_penalty},
                {"selection", o.ace.selection == BinSelection::kFixed ? "fixed" : "penalized"}}}};
    }
    json operator()(const OutcomeOptions& o) const {
      return {{"input", o.input}, {"counts", o.counts}, {"group_by", o.group_by}, {"cap", o.cap}};
    }
    json operator()(const AteOptions& o) const {
      return {{"input", o.input},       {"counts", o.counts},
              {"rhos", o.rhos},         {"proportions", o.proportions},
              {"draws", o.draws},       {"estimand", std::string(to_string(o.estimand))}};
    }
    json operator()(const SynthOptions& o) const {
      json rates = json::object();
      for (const auto& [k, v] : o.spec.race_rates) rates[k] = v;
      return {{"out", o.out},
              {"mechanism", std::string(to_string(o.spec.kind))},
              {"target", o.spec.target},
              {"p", o.spec.p},
              {"driver", o.spec.driver},
              {"intercept", o.spec.intercept},
              {"slope", o.spec.slope},
              {"race_rates", rates},
              {"n", o.spec.n},
              {"days", o.spec.days}};
    }
  };
  return std::visit(Visitor{}, options);
}

void run_audit(const PipelineRequest& req, const AuditOptions& o, const Loaded& cfg,
               RunManifest& m, Stopwatch& clock) {
  const StopTable table = load_input(cfg, o.input);
  m.timings_ms["load"] = clock.lap();

  const std::vector<std::string> vars =
      o.variables.empty() ? default_dcmr_variables(table, o.cond, o.spec) : o.variables;
  const AuditSeries series = cmr_all(table, o.cond, o.spec, vars);
  m.timings_ms["cmr"] = clock.lap();

  json meta{{"dataset_id", m.dataset_id},
            {"conditioning_variable", o.cond},
            {"bin", bin_spec_json(o.spec)},
            {"variables", vars},
            {"rows", table.rows()},
            {"unbinnable", series.dataset.unbinnable}};
  const MaxCorrResult dmc = series_score(series.dataset, o.ace);
  meta["dataset"] = series_json(series.dataset, dmc);
  m.messages.push_back(label_of(series.dataset, dmc));
  json per = json::array();
  for (const CMRSeries& s : series.per_variable) {
    const MaxCorrResult mc = series_score(s, o.ace);
    per.push_back(series_json(s, mc));
    m.messages.push_back(label_of(s, mc));
  }
  meta["per_variable"] = per;
  json summary = json::array();
  for (const auto& v : per_variable_missing_summary(table)) {
    summary.push_back({{"variable", v.variable},
                       {"pct_missing", v.pct_missing ? json(*v.pct_missing) : json(nullptr)},
                       {"n_missing", v.n_missing},
                       {"n_total", v.n_total},
                       {"coercion_failures", v.coercion_failures}});
  }
  meta["missing_summary"] = summary;
  m.timings_ms["maxcorr"] = clock.lap();

  const fs::path dir(req.out_dir);
  write_with(dir / "dcmr.csv", [&](std::ostream& os) { write_audit_csv(series, os); });
  write_file(dir / "audit.json", meta.dump(2) + "\n");

  // The chart reads its numbers back from the files just written.
  const csv::Document doc = csv::read_document((dir / "dcmr.csv").string());
  const json back = json::parse(read_file((dir / "audit.json").string()));
  std::string title = "dCMR by " + o.cond + " (";
  const json& mcv = back.at("dataset").at("maxcorr");
  if (mcv.is_null()) {
    title += "NA";
  } else {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << mcv.get<double>();
    title += os.str();
  }
  title += ")";
  if (!series.dataset.points.empty()) {
    write_file(dir / "dcmr.svg", render_svg(doc, ChartKind::kDcmr, {title, "dataset"}));
    m.outputs.push_back((dir / "dcmr.svg").string());
  }
  m.outputs.insert(m.outputs.begin(), {(dir / "dcmr.csv").string(), (dir / "audit.json").string()});
  m.timings_ms["write"] = clock.lap();
}

void run_outcome(const PipelineRequest& req, const OutcomeOptions& o, const Loaded& cfg,
                 RunManifest& m, Stopwatch& clock) {
  std::vector<RaceOutcomeCounts> groups;
  if (!o.counts.empty()) {
    groups = read_outcome_counts(o.counts);
  } else {
    if (o.input.empty()) throw Error(ErrorKind::kUsage, "outcome-sens needs --input or --counts");
    const StopTable table = load_input(cfg, o.input);
    groups = tally_outcome_counts(table, o.group_by, cfg.config.outcome).groups;
  }
  m.timings_ms["load"] = clock.lap();

  std::vector<CountySensitivity> counties;
  counties.reserve(groups.size());
  for (const auto& g : groups) counties.push_back(county_sensitivity(g, o.cap, true));
  const StatewideSummary summary = statewide_summary(counties);
  std::vector<BoxSummary> boxes;
  for (const auto& c : counties) {
    if (!c.points.empty()) boxes.push_back(box_summary(c));
    if (c.classification == SignClass::kExcluded) {
      m.messages.push_back(c.group_id + ": excluded (" + c.excluded_reason + ")");
    } else {
      m.messages.push_back(c.group_id + ": " + std::string(to_string(c.classification)) +
                           " ignore-NA " + fmt(c.ignore_na_disparity) + " range [" +
                           fmt(c.min_disparity) + ", " + fmt(c.max_disparity) + "]");
    }
  }
  m.exclusion_only = summary.excluded == summary.groups;
  m.timings_ms["enumerate"] = clock.lap();

  const fs::path dir(req.out_dir);
  write_with(dir / "outcome_points.csv",
             [&](std::ostream& os) { write_outcome_points_csv(counties, os); });
  write_with(dir / "outcome_groups.csv",
             [&](std::ostream& os) { write_outcome_groups_csv(counties, os); });
  write_with(dir / "outcome_summary.csv",
             [&](std::ostream& os) { write_outcome_summary_csv(summary, os); });
  write_with(dir / "outcome_box.csv", [&](std::ostream& os) { write_box_csv(boxes, os); });
  for (const char* f : {"outcome_points.csv", "outcome_groups.csv", "outcome_summary.csv",
                        "outcome_box.csv"}) {
    m.outputs.push_back((dir / f).string());
  }
  const csv::Document doc = csv::read_document((dir / "outcome_points.csv").string());
  if (!doc.rows.empty()) {
    write_file(dir / "outcome.svg",
               render_svg(doc, ChartKind::kOutcome, {"Outcome test disparity over allocations", {}}));
    m.outputs.push_back((dir / "outcome.svg").string());
  }
  m.timings_ms["write"] = clock.lap();
}

void run_ate(const PipelineRequest& req, const AteOptions& o, const Loaded& cfg, RunManifest& m,
             Stopwatch& clock) {
  StopSearchCounts counts;
  if (!o.counts.empty()) {
    counts = read_stop_counts(o.counts);
  } else {
    if (o.input.empty()) throw Error(ErrorKind::kUsage, "ate-sens needs --input or --counts");
    counts = tally_stop_counts(load_input(cfg, o.input), cfg.config.stops);
  }
  counts.validate();
  m.timings_ms["load"] = clock.lap();

  try {
    naive_search_disparity(counts);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDomain) throw;
    m.exclusion_only = true;
    m.messages.push_back(std::string("excluded: ") + e.what());
    return;
  }
  const auto plans = default_plans(o.proportions);
  const auto rows = ate_sensitivity_run(counts, o.rhos, plans, o.draws, req.seed, o.estimand);
  for (const AteRow& r : rows) {
    if (r.plan.kind == PlanKind::kRandom && r.draw > 0) continue;
    m.messages.push_back(r.plan.label() +
                         (r.plan.kind == PlanKind::kRandom ? " p_white=" + fmt(r.plan.p_white) : "") +
                         " rho=" + fmt(r.bounds.rho) + " naive " + fmt(r.bounds.naive) + " bounds [" +
                         fmt(r.bounds.lower) + ", " + fmt(r.bounds.upper) + "]");
  }
  m.timings_ms["bounds"] = clock.lap();

  const fs::path dir(req.out_dir);
  write_with(dir / "ate.csv", [&](std::ostream& os) { write_ate_csv(rows, os); });
  write_file(dir / "ate_ribbon.json", ate_ribbon_json(rows, o.estimand));
  const csv::Document doc = csv::read_document((dir / "ate.csv").string());
  write_file(dir / "ate.svg", render_svg(doc, ChartKind::kAte, {"Search ATE bounds by rho", {}}));
  for (const char* f : {"ate.csv", "ate_ribbon.json", "ate.svg"}) {
    m.outputs.push_back((dir / f).string());
  }
  m.timings_ms["write"] = clock.lap();
}

void run_synth(const PipelineRequest& req, const SynthOptions& o, RunManifest& m,
               Stopwatch& clock) {
  if (o.out.empty()) throw Error(ErrorKind::kUsage, "synth needs --out");
  MechanismSpec spec = o.spec;
  spec.seed = req.seed;
  const SynthResult r = generate(spec);
  m.timings_ms["generate"] = clock.lap();

  const fs::path masked(o.out);
  fs::path stem = masked;
  stem.replace_extension();
  const fs::path shadow = stem.string() + ".shadow.csv";
  const fs::path config = stem.string() + ".config.json";
  if (masked.has_parent_path()) fs::create_directories(masked.parent_path());
  write_with(masked, [&](std::ostream& os) { write_table_csv(r.masked, os); });
  write_with(shadow, [&](std::ostream& os) { write_table_csv(r.shadow, os); });
  json cols = json::array();
  for (const auto& s : synth_schema()) {
    cols.push_back({{"name", s.name},
                    {"kind", std::string(to_string(s.kind))},
                    {"role", std::string(to_string(s.role))}});
  }
  const json cfg{{"dataset_id", "synth-" + std::string(to_string(spec.kind))},
                 {"columns", cols},
                 {"race_column", "subject_race"},
                 {"search_column", "searched"},
                 {"contraband_column", "contraband"}};
  write_file(config, cfg.dump(2) + "\n");
  m.outputs = {masked.string(), shadow.string(), config.string()};
  std::size_t masked_cells = 0;
  for (std::size_t j = 0; j < r.masked.cols(); ++j) masked_cells += r.masked.column(j).na_count();
  m.messages.push_back(std::to_string(r.masked.rows()) + " rows, " + std::to_string(masked_cells) +
                       " masked cells");
  m.timings_ms["write"] = clock.lap();
}

}  // namespace

void write_table_csv(const StopTable& table, std::ostream& out) {
  csv::Writer w(out);
  w.row(table.names());
  std::vector<std::string> fields(table.cols());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) fields[j] = format_cell(table.column(j).cell(i));
    w.row(fields);
  }
}

void write_audit_csv(const AuditSeries& series, std::ostream& out) {
  csv::Writer w(out);
  w.row({"bin", "target", "rate", "count"});
  auto emit = [&](const CMRSeries& s) {
    for (const CmrPoint& p : s.points) {
      w.row({p.bin.key, s.target, fmt(p.rate), std::to_string(p.count)});
    }
  };
  emit(series.dataset);
  for (const CMRSeries& s : series.per_variable) emit(s);
}

void write_outcome_points_csv(std::span<const CountySensitivity> counties, std::ostream& out) {
  csv::Writer w(out);
  w.row({"group", "a", "b", "prop_white", "disparity"});
  for (const auto& c : counties) {
    for (const SensitivityPoint& p : c.points) {
      w.row({c.group_id, std::to_string(p.alloc.a), std::to_string(p.alloc.b), fmt(p.prop_white),
             fmt(p.disparity)});
    }
  }
}

void write_outcome_groups_csv(std::span<const CountySensitivity> counties, std::ostream& out) {
  csv::Writer w(out);
  w.row({"group", "black_hit", "black_miss", "white_hit", "white_miss", "na_hit", "na_miss",
         "ignore_na", "min", "max", "enumerated", "classification", "reason"});
  for (const auto& c : counties) {
    const auto& k = c.counts;
    w.row({c.group_id, std::to_string(k.black_hit), std::to_string(k.black_miss),
           std::to_string(k.white_hit), std::to_string(k.white_miss), std::to_string(k.na_hit),
           std::to_string(k.na_miss), fmt(c.ignore_na_disparity), fmt(c.min_disparity),
           fmt(c.max_disparity), std::to_string(c.enumerated),
           std::string(to_string(c.classification)), c.excluded_reason});
  }
}

void write_outcome_summary_csv(const StatewideSummary& s, std::ostream& out) {
  csv::Writer w(out);
  w.row({"with_missingness", "negative", "positive", "negative_to_positive",
         "positive_to_negative", "remain_negative", "remain_positive", "boundary", "excluded",
         "groups"});
  w.row({std::to_string(s.with_missingness), std::to_string(s.negative),
         std::to_string(s.positive), std::to_string(s.negative_to_positive),
         std::to_string(s.positive_to_negative), std::to_string(s.remain_negative),
         std::to_string(s.remain_positive), std::to_string(s.boundary),
         std::to_string(s.excluded), std::to_string(s.groups)});
}

void write_box_csv(std::span<const BoxSummary> boxes, std::ostream& out) {
  csv::Writer w(out);
  w.row({"group", "lower", "upper", "count", "min", "q1", "median", "q3", "max"});
  for (const auto& b : boxes) {
    w.row({b.group_id, "all", "all", "", "", "", fmt(b.median), "", ""});
    for (const auto& k : b.buckets) {
      w.row({b.group_id, fmt(k.lower), fmt(k.upper), std::to_string(k.count), fmt(k.min),
             fmt(k.q1), fmt(k.median), fmt(k.q3), fmt(k.max)});
    }
  }
}

void write_ate_csv(std::span<const AteRow> rows, std::ostream& out) {
  csv::Writer w(out);
  w.row({"plan", "p_white", "draw", "rho", "naive", "lower", "upper"});
  for (const AteRow& r : rows) {
    const bool split = r.plan.kind == PlanKind::kRandom || r.plan.kind == PlanKind::kProportion;
    w.row({r.plan.label(), split ? fmt(r.plan.p_white) : "NA", std::to_string(r.draw),
           fmt(r.bounds.rho), fmt(r.bounds.naive), fmt(r.bounds.lower), fmt(r.bounds.upper)});
  }
}

std::string ate_ribbon_json(std::span<const AteRow> rows, Estimand estimand) {
  std::map<double, json> panels;
  for (const AteRow& r : rows) {
    json& p = panels[r.bounds.rho];
    if (p.is_null()) p = {{"rho", r.bounds.rho}, {"pi", r.bounds.pi}, {"series", json::array()}};
    json s{{"plan", r.plan.label()},
           {"draw", r.draw},
           {"naive", number_or_null(r.bounds.naive)},
           {"lower", number_or_null(r.bounds.lower)},
           {"upper", number_or_null(r.bounds.upper)}};
    if (r.plan.kind == PlanKind::kRandom || r.plan.kind == PlanKind::kProportion) {
      s["p_white"] = r.plan.p_white;
    }
    p["series"].push_back(std::move(s));
  }
  json doc{{"estimand", std::string(to_string(estimand))},
           {"reference_line", {{"y", 0.0}, {"style", "dashed"}}},
           {"panels", json::array()}};
  for (auto& [rho, p] : panels) doc["panels"].push_back(std::move(p));
  return doc.dump(2) + "\n";
}

std::vector<RaceOutcomeCounts> read_outcome_counts(const std::string& path) {
  const csv::Document doc = csv::read_document(path);
  const std::size_t g = doc.column("group");
  const std::size_t idx[] = {doc.column("black_hit"), doc.column("black_miss"),
                             doc.column("white_hit"), doc.column("white_miss"),
                             doc.column("na_hit"),    doc.column("na_miss")};
  std::vector<RaceOutcomeCounts> out;
  for (const auto& row : doc.rows) {
    if (row.size() != doc.header.size()) throw Error(ErrorKind::kData, "ragged row in " + path);
    RaceOutcomeCounts c;
    c.group_id = row[g];
    std::uint64_t* fields[] = {&c.black_hit, &c.black_miss, &c.white_hit,
                               &c.white_miss, &c.na_hit,    &c.na_miss};
    for (std::size_t k = 0; k < 6; ++k) *fields[k] = parse_count(row[idx[k]], doc.header[idx[k]]);
    out.push_back(std::move(c));
  }
  return out;
}

StopSearchCounts read_stop_counts(const std::string& path) {
  const csv::Document doc = csv::read_document(path);
  if (doc.rows.size() != 1) throw Error(ErrorKind::kData, path + " must hold exactly one row");
  const auto& row = doc.rows[0];
  if (row.size() != doc.header.size()) throw Error(ErrorKind::kData, "ragged row in " + path);
  StopSearchCounts k;
  const std::pair<const char*, std::uint64_t*> fields[] = {
      {"black_searched", &k.black_searched}, {"black_stops", &k.black_stops},
      {"white_searched", &k.white_searched}, {"white_stops", &k.white_stops},
      {"na_searched", &k.na_searched},       {"na_stops", &k.na_stops}};
  for (const auto& [name, dst] : fields) *dst = parse_count(row[doc.column(name)], name);
  k.validate();
  return k;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::kAudit: return "audit";
    case Command::kOutcomeSens: return "outcome-sens";
    case Command::kAteSens: return "ate-sens";
    case Command::kSynth: return "synth";
  }
  return "?";
}

Command parse_command(std::string_view text) {
  for (Command c : {Command::kAudit, Command::kOutcomeSens, Command::kAteSens, Command::kSynth}) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorKind::kUsage, "unknown command \"" + std::string(text) + "\"");
}

AnalysisConfig parse_analysis_config(std::string_view json_text) {
  AnalysisConfig cfg;
  cfg.dataset = parse_dataset_config(json_text);
  const json doc = json::parse(json_text);
  try {
    const std::string race = doc.value("race_column", cfg.outcome.race);
    const std::string search = doc.value("search_column", cfg.outcome.searched);
    const std::string black = doc.value("black_label", cfg.outcome.black_label);
    const std::string white = doc.value("white_label", cfg.outcome.white_label);
    cfg.outcome = {race, search, doc.value("contraband_column", cfg.outcome.contraband), black,
                   white};
    cfg.stops = {race, search, black, white};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed config: ") + e.what());
  }
  return cfg;
}

std::string RunManifest::to_json() const {
  json j{{"dataset_id", dataset_id},
         {"config_digest", config_digest},
         {"seed", seed},
         {"command", command},
         {"outputs", outputs},
         {"timings_ms", timings_ms},
         {"exclusion_only", exclusion_only},
         {"messages", messages}};
  return j.dump(2) + "\n";
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

RunManifest run_pipeline(const PipelineRequest& req) {
  Stopwatch clock;
  if (req.out_dir.empty()) throw Error(ErrorKind::kUsage, "--out is required");
  std::error_code ec;
  fs::create_directories(req.out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + req.out_dir + ": " + ec.message());

  const bool needs_config =
      std::holds_alternative<AuditOptions>(req.options) ||
      (std::holds_alternative<OutcomeOptions>(req.options) &&
       std::get<OutcomeOptions>(req.options).counts.empty()) ||
      (std::holds_alternative<AteOptions>(req.options) &&
       std::get<AteOptions>(req.options).counts.empty());
  const Loaded cfg = load_config(req.config_path, needs_config);

  RunManifest m;
  m.dataset_id = cfg.config.dataset.dataset_id;
  m.seed = req.seed;
  const json opts = options_json(req.options);
  m.config_digest =
      sha256_hex(cfg.bytes + "\n" + opts.dump() + "\nseed=" + std::to_string(req.seed));
  m.timings_ms["config"] = clock.lap();

  struct Dispatch {
    const PipelineRequest& req;
    const Loaded& cfg;
    RunManifest& m;
    Stopwatch& clock;
    void operator()(const AuditOptions& o) {
      m.command = "audit";
      run_audit(req, o, cfg, m, clock);
    }
    void operator()(const OutcomeOptions& o) {
      m.command = "outcome-sens";
      run_outcome(req, o, cfg, m, clock);
    }
    void operator()(const AteOptions& o) {
      m.command = "ate-sens";
      run_ate(req, o, cfg, m, clock);
    }
    void operator()(const SynthOptions& o) {
      m.command = "synth";
      run_synth(req, o, m, clock);
    }
  };
  std::visit(Dispatch{req, cfg, m, clock}, req.options);

  const fs::path manifest = fs::path(req.out_dir) / "manifest.json";
  m.outputs.push_back(manifest.string());
  write_file(manifest, m.to_json());
  return m;
}

}  // namespace stopaudit
