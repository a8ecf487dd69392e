// histprep: prepare process-historian time-series data for analytics and
// soft-sensor work. See README.md for the pipeline config format.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "histprep/align/delay.hpp"
#include "histprep/align/lab.hpp"
#include "histprep/cleanse/compression.hpp"
#include "histprep/cleanse/outliers.hpp"
#include "histprep/cleanse/segments.hpp"
#include "histprep/core/errors.hpp"
#include "histprep/diagnostics/findings.hpp"
#include "histprep/diagnostics/report.hpp"
#include "histprep/ingest/clock_sync.hpp"
#include "histprep/ingest/csv.hpp"
#include "histprep/ingest/gridding.hpp"
#include "histprep/pipeline/runner.hpp"
#include "histprep/steadystate/rstat.hpp"
#include "histprep/synth/scenario.hpp"

namespace fs = std::filesystem;
using namespace histprep;

namespace {

bool log_enabled() {
  const char* v = std::getenv("HISTPREP_LOG");
  return v && std::string_view(v) != "" && std::string_view(v) != "off";
}

void log_note(const std::string& msg) {
  if (log_enabled()) std::cerr << "[histprep] " << msg << '\n';
}

Duration duration_opt(const std::string& text, const char* flag) {
  try {
    return parse_duration(text);
  } catch (const ParseError& e) {
    throw ParseError(std::string(flag) + ": " + e.what());
  }
}

RawSeries load_single_series(const std::string& path, const TagId& want_tag = "") {
  ingest::ParseOptions opts;
  auto frag = ingest::parse_historian_csv_file(path, {"cli", std::nullopt}, opts);
  if (!want_tag.empty()) {
    const auto it = frag.series.find(want_tag);
    if (it == frag.series.end())
      throw ValidationError("'" + path + "' has no tag '" + want_tag + "'");
    return it->second;
  }
  if (frag.series.size() != 1)
    throw ValidationError("'" + path + "' holds " + std::to_string(frag.series.size()) +
                          " tags; pass --tag to pick one");
  return frag.series.begin()->second;
}

void write_file(const std::string& path, const std::string& body) {
  write_text_file(path, body);
  log_note("wrote " + path);
}

std::string segments_to_csv(const std::vector<Segment>& segs) {
  std::ostringstream out;
  out << "start,end,label,evidence\n";
  for (const auto& seg : segs) {
    out << format_iso8601(seg.start) << ',' << format_iso8601(seg.end) << ','
        << segment_label_string(seg) << ',';
    if (seg.evidence) out << ingest::format_double(*seg.evidence);
    out << '\n';
  }
  return out.str();
}

Json findings_to_json(const std::vector<diag::Finding>& findings) {
  Json arr = Json::array();
  for (const auto& f : findings) {
    Json e;
    e["severity"] = to_string(f.severity);
    e["kind"] = to_string(f.kind);
    e["tags"] = f.tags;
    Json ev;
    for (const auto& [k, v] : f.evidence) ev[k] = v;
    e["evidence"] = std::move(ev);
    e["message"] = f.message;
    arr.push_back(std::move(e));
  }
  return arr;
}

// ---- subcommand payloads ----

struct IngestArgs {
  std::string input, source = "dcs", output, report_path;
  double max_error_rate = 0.01;
};

int cmd_ingest(const IngestArgs& a) {
  ingest::ParseOptions opts;
  opts.max_error_rate = a.max_error_rate;
  ingest::ParseReport rep;
  const auto frag = ingest::parse_historian_csv_file(a.input, {a.source, std::nullopt},
                                                     opts, &rep);
  if (!a.output.empty()) {
    std::ostringstream out;
    ingest::write_historian_csv(out, frag);
    write_file(a.output, out.str());
  }
  Json j;
  j["rows_total"] = rep.rows_total;
  j["rows_ok"] = rep.rows_ok;
  j["missing_values"] = rep.missing_values;
  Json issues = Json::array();
  for (const auto& iss : rep.malformed) {
    Json e;
    e["line"] = iss.line;
    e["what"] = iss.what;
    issues.push_back(std::move(e));
  }
  j["malformed"] = std::move(issues);
  j["tags"] = Json::array();
  for (const auto& [tag, s] : frag.series) {
    Json e;
    e["tag"] = tag;
    e["samples"] = s.size();
    j["tags"].push_back(std::move(e));
  }
  if (!a.report_path.empty())
    write_file(a.report_path, j.dump(2) + "\n");
  else
    std::cout << j.dump(2) << '\n';
  return 0;
}

struct GridArgs {
  std::string input, tag, output;
  std::string interval, method = "linear", max_gap;
};

int cmd_grid(const GridArgs& a) {
  const RawSeries s = load_single_series(a.input, a.tag);
  ingest::GridSpec spec;
  spec.interval = duration_opt(a.interval, "--interval");
  spec.method = grid_method_from_string(a.method);
  spec.max_gap = a.max_gap.empty()
                     ? Duration{ingest::detect_resolution(s).dominant.us * 4}
                     : duration_opt(a.max_gap, "--max-gap");
  if (spec.max_gap < spec.interval) spec.max_gap = spec.interval;
  if (s.empty()) throw NotEnoughData("grid: empty series");
  spec.start = s.front().t;
  const auto g = ingest::grid(s, spec);
  std::ostringstream out;
  ingest::write_gridded_csv(out, g);
  write_file(a.output, out.str());
  return 0;
}

struct CleanArgs {
  std::string input, out_dir = ".";
  double sigma = 3.0;
  std::string window;
  int min_window_points = 8;
  std::vector<double> mode_thresholds;
  std::string min_mode_duration = "0s";
  double shutdown_threshold = 0.0;
  bool has_shutdown = false;
  std::string shutdown_min = "8h";
  double static_band = -1.0;
  std::string static_min = "2h";
  bool compression = false;
  std::string nominal_scan;
};

int cmd_clean(const CleanArgs& a) {
  const GriddedSeries g = ingest::read_gridded_csv_file(a.input);
  fs::create_directories(a.out_dir);

  cleanse::OutlierParams p;
  p.k = a.sigma;
  p.min_window_points = a.min_window_points;
  if (!a.window.empty()) p.window = duration_opt(a.window, "--window");

  std::vector<size_t> idx;
  if (p.window) {
    idx = cleanse::detect_outliers_moving(g, p);
  } else {
    auto res = cleanse::detect_outliers_global(g, p);
    idx = std::move(res.indices);
    if (res.degenerate_constant) std::cerr << "warning: constant series (sigma = 0)\n";
  }
  {
    std::ostringstream out;
    out << "index,timestamp,value\n";
    for (const size_t i : idx)
      out << i << ',' << format_iso8601(g.time_at(i)) << ','
          << ingest::format_double(*g[i]) << '\n';
    write_file((fs::path(a.out_dir) / "outliers.csv").string(), out.str());
  }

  std::vector<Segment> segments;
  if (!a.mode_thresholds.empty()) {
    auto segs = cleanse::partition_modes(g, a.mode_thresholds,
                                         duration_opt(a.min_mode_duration, "--min-mode-duration"));
    segments.insert(segments.end(), segs.begin(), segs.end());
  }
  if (a.has_shutdown) {
    auto res = cleanse::detect_shutdown(g, a.shutdown_threshold,
                                        duration_opt(a.shutdown_min, "--shutdown-min"));
    segments.insert(segments.end(), res.shutdowns.begin(), res.shutdowns.end());
    segments.insert(segments.end(), res.anomalies.begin(), res.anomalies.end());
  }
  if (a.static_band >= 0) {
    auto segs = cleanse::detect_static(g, a.static_band,
                                       duration_opt(a.static_min, "--static-min"));
    segments.insert(segments.end(), segs.begin(), segs.end());
  }
  if (!segments.empty()) {
    std::stable_sort(segments.begin(), segments.end(),
                     [](const Segment& x, const Segment& y) { return x.start < y.start; });
    write_file((fs::path(a.out_dir) / "segments.csv").string(), segments_to_csv(segments));
  }

  if (a.compression) {
    if (a.nominal_scan.empty())
      throw ValidationError("--compression needs --nominal-scan");
    const RawSeries raw = load_single_series(a.input);
    const auto f = cleanse::detect_compression(raw, duration_opt(a.nominal_scan, "--nominal-scan"));
    Json j;
    j["archival_ratio"] = f.archival_ratio;
    j["linear_fraction"] = f.linear_fraction;
    j["suspected"] = f.suspected;
    write_file((fs::path(a.out_dir) / "compression.json").string(), j.dump(2) + "\n");
  }
  std::cout << idx.size() << " outlier(s), " << segments.size() << " segment(s)\n";
  return 0;
}

struct SteadyArgs {
  std::string input, output;
  double lambda1 = 0.2, lambda2 = 0.1, lambda3 = 0.1;
  std::string r_crit = "2.0";
  double alpha = 0.05;
  std::uint64_t mc_seed = 20210301;
  std::size_t mc_samples = 20000;
  int hold_count = 3;
};

int cmd_steady(const SteadyArgs& a) {
  const GriddedSeries g = ingest::read_gridded_csv_file(a.input);
  steady::RStatParams p;
  p.lambda1 = a.lambda1;
  p.lambda2 = a.lambda2;
  p.lambda3 = a.lambda3;
  p.hold_count = a.hold_count;
  if (a.r_crit == "auto") {
    p.r_crit = steady::calibrate_rcrit(p, a.alpha, a.mc_samples, a.mc_seed);
    log_note("calibrated r_crit = " + ingest::format_double(p.r_crit));
  } else {
    p.r_crit = std::stod(a.r_crit);
  }
  const auto segs = steady::segment_steady(g, p);
  write_file(a.output, segments_to_csv(segs));
  return 0;
}

struct AlignArgs {
  std::string input_u, input_y;
  std::string max_lag;
  bool allow_negative = false;
  std::string shifted_out;
  std::string delay_out;
};

int cmd_align(const AlignArgs& a) {
  const GriddedSeries u = ingest::read_gridded_csv_file(a.input_u);
  const GriddedSeries y = ingest::read_gridded_csv_file(a.input_y);
  align::DelayOptions opts;
  opts.allow_negative = a.allow_negative;
  const auto est = align::estimate_delay(u, y, duration_opt(a.max_lag, "--max-lag"), opts);
  Json j;
  j["lag_steps"] = est.lag;
  j["lag_us"] = est.lag_duration.us;
  j["peak_corr"] = est.peak_corr;
  j["confident"] = est.confident;
  if (!a.delay_out.empty())
    write_file(a.delay_out, j.dump(2) + "\n");
  else
    std::cout << j.dump(2) << '\n';
  if (!a.shifted_out.empty()) {
    std::ostringstream out;
    ingest::write_gridded_csv(out, align::apply_shift(u, est.lag));
    write_file(a.shifted_out, out.str());
  }
  return 0;
}

struct LabArgs {
  std::string indicator, results, acceptance, predictions, output;
  std::string accept_window = "5m", delta_t = "0s";
  double alpha = 0.3;
};

int cmd_lab(const LabArgs& a) {
  const RawSeries ind = load_single_series(a.indicator);
  const RawSeries res = load_single_series(a.results);
  std::optional<RawSeries> acc;
  if (!a.acceptance.empty()) acc = load_single_series(a.acceptance);
  const auto parsed = align::parse_lab_events(
      ind, res, acc ? &*acc : nullptr, duration_opt(a.accept_window, "--accept-window"),
      duration_opt(a.delta_t, "--delta-t"));

  std::vector<align::Residual> residuals;
  if (!a.predictions.empty()) {
    const GriddedSeries pred = ingest::read_gridded_csv_file(a.predictions);
    residuals = align::compute_residuals(pred, parsed.events).residuals;
  }
  std::ostringstream out;
  for (const auto& w : parsed.warnings) out << "# warning: " << w << '\n';
  for (const auto& t : parsed.incomplete)
    out << "# incomplete: cycle open since " << format_iso8601(t) << '\n';
  align::write_lab_audit_csv(out, parsed.events, residuals, a.alpha);
  if (!a.output.empty())
    write_file(a.output, out.str());
  else
    std::cout << out.str();
  std::cerr << parsed.events.size() << " event(s), "
            << std::count_if(parsed.events.begin(), parsed.events.end(),
                             [](const LabEvent& e) { return e.accepted; })
            << " accepted\n";
  return 0;
}

struct DiagnoseArgs {
  std::vector<std::string> collinear_files;
  double rho_threshold = 0.95, vif_threshold = 10.0;
  std::vector<std::string> balance_in, balance_out;
  std::string balance_window = "1h";
  double balance_tolerance = 0.02;
  std::string loop_mode_file, mode_map_text;
  std::string sign_mv, sign_cv, expected_sign = "+";
  std::string output;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  std::vector<diag::Finding> findings;
  std::vector<Segment> loop_segments;

  if (!a.loop_mode_file.empty()) {
    std::map<std::int64_t, diag::LoopMode> mode_map;
    std::istringstream ss(a.mode_map_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw ParseError("--mode-map: expected code=open|closed pairs");
      const std::int64_t code = std::stoll(item.substr(0, eq));
      const std::string mode = item.substr(eq + 1);
      if (mode == "open") mode_map[code] = diag::LoopMode::OpenLoop;
      else if (mode == "closed") mode_map[code] = diag::LoopMode::ClosedLoop;
      else throw ParseError("--mode-map: unknown mode '" + mode + "'");
    }
    loop_segments = diag::segment_loop_mode(load_single_series(a.loop_mode_file), mode_map);
  }

  if (!a.collinear_files.empty()) {
    std::vector<GriddedSeries> tags;
    for (const auto& f : a.collinear_files)
      tags.push_back(ingest::read_gridded_csv_file(f));
    auto fs2 = diag::flag_collinear(tags, a.rho_threshold, a.vif_threshold);
    findings.insert(findings.end(), fs2.begin(), fs2.end());
  }
  if (!a.balance_in.empty() || !a.balance_out.empty()) {
    std::vector<GriddedSeries> in, out;
    for (const auto& f : a.balance_in) in.push_back(ingest::read_gridded_csv_file(f));
    for (const auto& f : a.balance_out) out.push_back(ingest::read_gridded_csv_file(f));
    auto res = diag::balance_closure(in, out, duration_opt(a.balance_window, "--balance-window"),
                                     a.balance_tolerance);
    findings.insert(findings.end(), res.findings.begin(), res.findings.end());
  }
  if (!a.sign_mv.empty()) {
    if (loop_segments.empty())
      throw ValidationError("--sign-check needs --loop-mode/--mode-map segments");
    const GriddedSeries mv = ingest::read_gridded_csv_file(a.sign_mv);
    const GriddedSeries cv = ingest::read_gridded_csv_file(a.sign_cv);
    auto fs2 = diag::closed_loop_sign_check(mv, cv, loop_segments,
                                            a.expected_sign == "-" ? -1 : 1);
    findings.insert(findings.end(), fs2.begin(), fs2.end());
  }

  Json j;
  j["findings"] = findings_to_json(findings);
  if (!loop_segments.empty()) {
    Json segs = Json::array();
    for (const auto& seg : loop_segments) {
      Json e;
      e["start"] = format_iso8601(seg.start);
      e["end"] = format_iso8601(seg.end);
      e["label"] = segment_label_string(seg);
      segs.push_back(std::move(e));
    }
    j["loop_segments"] = std::move(segs);
  }
  if (!a.output.empty())
    write_file(a.output, j.dump(2) + "\n");
  else
    std::cout << j.dump(2) << '\n';
  return 0;
}

struct SynthArgs {
  std::string scenario_file;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "synth_out";
  std::string write_default;
};

int cmd_synth(const SynthArgs& a) {
  if (!a.write_default.empty()) {
    write_file(a.write_default, synth::full_demo_scenario().to_json().dump(2) + "\n");
    return 0;
  }
  synth::Scenario sc = a.scenario_file.empty()
                           ? synth::full_demo_scenario()
                           : synth::Scenario::from_json(load_json_file(a.scenario_file));
  if (a.seed_set) sc.seed = a.seed;
  const auto out = synth::generate_scenario(sc);

  fs::create_directories(a.out_dir);
  // one CSV per source, so multi-source ingest round-trips through files
  for (const auto& src : out.dataset.sources) {
    ingest::Dataset per_source;
    per_source.id = out.dataset.id;
    for (const auto& [tag, s] : out.dataset.series) {
      const auto m = out.dataset.meta.find(tag);
      if (m != out.dataset.meta.end() && m->second.source == src.name)
        per_source.put(s, m->second);
    }
    if (per_source.series.empty()) continue;
    std::ostringstream csv;
    ingest::write_historian_csv(csv, per_source);
    write_file((fs::path(a.out_dir) / (src.name + ".csv")).string(), csv.str());
  }
  write_file((fs::path(a.out_dir) / "manifest.json").string(), out.manifest.to_json());
  write_file((fs::path(a.out_dir) / "scenario.json").string(),
             sc.to_json().dump(2) + "\n");
  std::cout << "scenario '" << sc.id << "' seed " << sc.seed << ": "
            << out.dataset.series.size() << " tags written to " << a.out_dir << '\n';
  return 0;
}

struct RunArgs {
  std::string config;
  std::string base_dir = ".";
  bool report_only = false;
};

int cmd_run(const RunArgs& a) {
  pipeline::PipelineConfig cfg = pipeline::PipelineConfig::from_file(a.config);
  if (a.report_only) cfg.steps.clear();
  const auto result = pipeline::run_pipeline(cfg, a.base_dir);
  const auto worst = diag::worst_severity(result.report);
  std::cout << result.report.findings.size() << " finding(s)";
  if (worst) std::cout << ", worst severity " << to_string(*worst);
  std::cout << "; " << result.artifacts.size() << " artifact(s) under "
            << (fs::path(a.base_dir) / cfg.output.dir).string() << '\n';
  return result.exit_code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"histprep: industrial historian data preparation toolkit"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* c_ingest = app.add_subcommand("ingest", "Parse and validate a historian CSV export");
  c_ingest->add_option("-i,--input", ingest_args.input, "input CSV")->required();
  c_ingest->add_option("--source", ingest_args.source, "source system name");
  c_ingest->add_option("-o,--output", ingest_args.output, "write normalized CSV here");
  c_ingest->add_option("--report", ingest_args.report_path, "write parse report JSON here");
  c_ingest->add_option("--max-error-rate", ingest_args.max_error_rate,
                       "malformed-row rate that fails the parse");

  GridArgs grid_args;
  auto* c_grid = app.add_subcommand("grid", "Resample one tag onto a uniform grid");
  c_grid->add_option("-i,--input", grid_args.input, "input CSV")->required();
  c_grid->add_option("--tag", grid_args.tag, "tag to grid (optional if single-tag file)");
  c_grid->add_option("--interval", grid_args.interval, "grid interval, e.g. 5s")->required();
  c_grid->add_option("--method", grid_args.method, "zoh|linear");
  c_grid->add_option("--max-gap", grid_args.max_gap, "max source gap, e.g. 20s");
  c_grid->add_option("-o,--output", grid_args.output, "output gridded CSV")->required();

  CleanArgs clean_args;
  auto* c_clean = app.add_subcommand("clean", "Outliers, modes, shutdowns, static runs, compression");
  c_clean->add_option("-i,--input", clean_args.input, "gridded CSV")->required();
  c_clean->add_option("-o,--out-dir", clean_args.out_dir, "output directory");
  c_clean->add_option("--sigma", clean_args.sigma, "sigma multiplier k");
  c_clean->add_option("--window", clean_args.window, "moving window, e.g. 10m (absent = global)");
  c_clean->add_option("--min-window-points", clean_args.min_window_points,
                      "min present points per window");
  c_clean->add_option("--modes", clean_args.mode_thresholds,
                      "ascending mode thresholds")->delimiter(',');
  c_clean->add_option("--min-mode-duration", clean_args.min_mode_duration,
                      "debounce for mode segments");
  auto* shut = c_clean->add_option("--shutdown-threshold", clean_args.shutdown_threshold,
                                   "values below this are shutdown candidates");
  c_clean->add_option("--shutdown-min", clean_args.shutdown_min,
                      "min duration for a Shutdown segment");
  c_clean->add_option("--static-band", clean_args.static_band,
                      "noise band for static detection (omit to skip)");
  c_clean->add_option("--static-min", clean_args.static_min, "min static duration");
  c_clean->add_flag("--compression", clean_args.compression, "run compression heuristics");
  c_clean->add_option("--nominal-scan", clean_args.nominal_scan, "nominal scan interval");
  c_clean->callback([&] { clean_args.has_shutdown = shut->count() > 0; });

  SteadyArgs steady_args;
  auto* c_steady = app.add_subcommand("steady", "Steady-state/transient segmentation (R-statistic)");
  c_steady->add_option("-i,--input", steady_args.input, "gridded CSV")->required();
  c_steady->add_option("-o,--output", steady_args.output, "segments CSV")->required();
  c_steady->add_option("--lambda1", steady_args.lambda1, "mean filter factor");
  c_steady->add_option("--lambda2", steady_args.lambda2, "variance filter factor");
  c_steady->add_option("--lambda3", steady_args.lambda3, "difference filter factor");
  c_steady->add_option("--r-crit", steady_args.r_crit, "critical value, or 'auto'");
  c_steady->add_option("--alpha", steady_args.alpha, "false-alarm rate for auto calibration");
  c_steady->add_option("--seed", steady_args.mc_seed, "Monte Carlo seed for auto calibration");
  c_steady->add_option("--mc-samples", steady_args.mc_samples, "Monte Carlo sample count");
  c_steady->add_option("--hold", steady_args.hold_count, "consecutive exceedances for Transient");

  AlignArgs align_args;
  auto* c_align = app.add_subcommand("align", "Estimate and apply input/output delay");
  c_align->add_option("-u,--input-u", align_args.input_u, "input (MV) gridded CSV")->required();
  c_align->add_option("-y,--input-y", align_args.input_y, "output (CV) gridded CSV")->required();
  c_align->add_option("--max-lag", align_args.max_lag, "search window, e.g. 5m")->required();
  c_align->add_flag("--allow-negative", align_args.allow_negative, "search negative lags too");
  c_align->add_option("--shifted-out", align_args.shifted_out, "write u shifted by the lag");
  c_align->add_option("-o,--output", align_args.delay_out, "write the estimate JSON here");

  LabArgs lab_args;
  auto* c_lab = app.add_subcommand("lab", "Reconstruct lab events, residuals, and bias trace");
  c_lab->add_option("--indicator", lab_args.indicator, "indicator tag CSV")->required();
  c_lab->add_option("--results", lab_args.results, "results tag CSV")->required();
  c_lab->add_option("--acceptance", lab_args.acceptance, "acceptance tag CSV");
  c_lab->add_option("--accept-window", lab_args.accept_window, "result matching window");
  c_lab->add_option("--delta-t", lab_args.delta_t, "sample collection time offset");
  c_lab->add_option("--predictions", lab_args.predictions, "gridded prediction CSV for residuals");
  c_lab->add_option("--alpha", lab_args.alpha, "bias lag-filter factor");
  c_lab->add_option("-o,--output", lab_args.output, "audit CSV path");

  DiagnoseArgs diag_args;
  auto* c_diag = app.add_subcommand("diagnose", "Cross-tag diagnostics on gridded CSVs");
  c_diag->add_option("--collinear", diag_args.collinear_files,
                     "gridded CSVs to test for collinearity")->delimiter(',');
  c_diag->add_option("--rho-threshold", diag_args.rho_threshold, "pairwise |rho| threshold");
  c_diag->add_option("--vif-threshold", diag_args.vif_threshold, "VIF threshold");
  c_diag->add_option("--balance-in", diag_args.balance_in, "in-flow gridded CSVs")->delimiter(',');
  c_diag->add_option("--balance-out", diag_args.balance_out, "out-flow gridded CSVs")->delimiter(',');
  c_diag->add_option("--balance-window", diag_args.balance_window, "closure window");
  c_diag->add_option("--balance-tolerance", diag_args.balance_tolerance, "relative tolerance");
  c_diag->add_option("--loop-mode", diag_args.loop_mode_file, "loop mode tag CSV");
  c_diag->add_option("--mode-map", diag_args.mode_map_text, "e.g. 0=open,1=closed");
  c_diag->add_option("--sign-mv", diag_args.sign_mv, "MV gridded CSV for the sign check");
  c_diag->add_option("--sign-cv", diag_args.sign_cv, "CV gridded CSV for the sign check");
  c_diag->add_option("--expected-sign", diag_args.expected_sign, "+ or -");
  c_diag->add_option("-o,--output", diag_args.output, "findings JSON path");

  SynthArgs synth_args;
  auto* c_synth = app.add_subcommand("synth", "Generate a ground-truth synthetic dataset");
  c_synth->add_option("--scenario", synth_args.scenario_file, "scenario JSON (default: built-in)");
  auto* seed_opt = c_synth->add_option("--seed", synth_args.seed, "override the scenario seed");
  c_synth->add_option("--out-dir", synth_args.out_dir, "output directory");
  c_synth->add_option("--write-default", synth_args.write_default,
                      "write the built-in scenario JSON here and exit");
  c_synth->callback([&] { synth_args.seed_set = seed_opt->count() > 0; });

  RunArgs run_args;
  auto* c_run = app.add_subcommand("run", "Run a configured pipeline end to end");
  c_run->add_option("-c,--config", run_args.config, "pipeline config JSON")->required();
  c_run->add_option("--base-dir", run_args.base_dir, "base for relative paths");

  RunArgs report_args;
  auto* c_report = app.add_subcommand("report", "Summaries-only report for a configured dataset");
  c_report->add_option("-c,--config", report_args.config, "pipeline config JSON")->required();
  c_report->add_option("--base-dir", report_args.base_dir, "base for relative paths");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest_args);
    if (c_grid->parsed()) return cmd_grid(grid_args);
    if (c_clean->parsed()) return cmd_clean(clean_args);
    if (c_steady->parsed()) return cmd_steady(steady_args);
    if (c_align->parsed()) return cmd_align(align_args);
    if (c_lab->parsed()) return cmd_lab(lab_args);
    if (c_diag->parsed()) return cmd_diagnose(diag_args);
    if (c_synth->parsed()) return cmd_synth(synth_args);
    if (c_run->parsed()) return cmd_run(run_args);
    if (c_report->parsed()) {
      report_args.report_only = true;
      return cmd_run(report_args);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
