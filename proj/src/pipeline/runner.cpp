#include "histprep/pipeline/runner.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "histprep/align/delay.hpp"
#include "histprep/align/lab.hpp"
#include "histprep/cleanse/compression.hpp"
#include "histprep/cleanse/outliers.hpp"
#include "histprep/cleanse/segments.hpp"
#include "histprep/core/errors.hpp"
#include "histprep/ingest/clock_sync.hpp"
#include "histprep/ingest/csv.hpp"
#include "histprep/ingest/gridding.hpp"
#include "histprep/steadystate/rstat.hpp"

namespace histprep::pipeline {

namespace fs = std::filesystem;

namespace {

struct State {
  ingest::Dataset dataset;
  std::map<TagId, GriddedSeries> gridded;
  std::map<TagId, std::vector<Segment>> segments;
  std::map<TagId, std::vector<Segment>> loop_segments; // by mode tag
  std::map<TagId, std::size_t> outlier_counts;
  std::vector<diag::Finding> findings;
  // deterministic artifact bodies, keyed by relative path
  std::map<std::string, std::string> artifacts;
};

const RawSeries& need_raw(const State& st, const TagId& tag, const char* step) {
  const auto it = st.dataset.series.find(tag);
  if (it == st.dataset.series.end())
    throw ValidationError(std::string(step) + ": tag '" + tag +
                          "' not present in the dataset");
  return it->second;
}

const GriddedSeries& need_gridded(const State& st, const TagId& tag, const char* step) {
  const auto it = st.gridded.find(tag);
  if (it == st.gridded.end())
    throw ValidationError(std::string(step) + ": tag '" + tag +
                          "' has not been gridded; add a grid step first");
  return it->second;
}

void add_segments(State& st, const TagId& tag, const std::vector<Segment>& segs) {
  auto& dst = st.segments[tag];
  dst.insert(dst.end(), segs.begin(), segs.end());
}

std::string segments_csv(const std::vector<Segment>& segs) {
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

void exec_grid(State& st, const GridStep& step) {
  if (step.tags.empty()) throw ValidationError("grid: no tags given");
  Timestamp lo = step.start.value_or(Timestamp{INT64_MAX});
  Timestamp hi = step.end.value_or(Timestamp{INT64_MIN});
  if (!step.start || !step.end) {
    for (const auto& tag : step.tags) {
      const auto& s = need_raw(st, tag, "grid");
      if (s.empty()) throw NotEnoughData("grid: tag '" + tag + "' is empty");
      if (!step.start) lo = std::min(lo, s.front().t);
      if (!step.end) hi = std::max(hi, s.back().t);
    }
  }
  for (const auto& tag : step.tags) {
    const auto& s = need_raw(st, tag, "grid");
    ingest::GridSpec spec;
    spec.start = lo;
    spec.end = hi;
    spec.interval = step.interval;
    spec.method = step.method;
    spec.max_gap = step.max_gap.us > 0
                       ? step.max_gap
                       : Duration{ingest::detect_resolution(s).dominant.us * 4};
    if (spec.max_gap < spec.interval) spec.max_gap = spec.interval;
    st.gridded.insert_or_assign(tag, ingest::grid(s, spec));
  }
}

void exec_resolution(State& st, const ResolutionStep& step,
                     std::map<TagId, diag::TagSummary>& summaries,
                     diag::Severity severity) {
  std::vector<TagId> tags = step.tags;
  if (tags.empty()) {
    for (const auto& [tag, s] : st.dataset.series) {
      (void)s;
      tags.push_back(tag);
    }
  }
  for (const auto& tag : tags) {
    const auto& s = need_raw(st, tag, "resolution");
    if (s.size() < 2) continue;
    const auto est = ingest::detect_resolution(s);
    summaries[tag].resolution = est.dominant;
    const auto meta = st.dataset.meta.find(tag);
    if (meta != st.dataset.meta.end() && meta->second.scan_interval) {
      const double ratio = static_cast<double>(est.dominant.us) /
                           static_cast<double>(meta->second.scan_interval->us);
      if (ratio > step.mismatch_ratio) {
        diag::Finding f;
        f.tags = {tag};
        f.kind = diag::FindingKind::ResolutionMismatch;
        f.severity = severity;
        f.evidence.push_back({"resolution_ratio", ratio});
        f.message = "tag '" + tag + "' archives at " + format_duration(est.dominant) +
                    " but scans at " + format_duration(*meta->second.scan_interval) +
                    " (ratio " + ingest::format_double(ratio) +
                    "); retrieval frequency does not match collection frequency";
        st.findings.push_back(std::move(f));
      }
    }
  }
}

void exec_clock_sync(State& st, const ClockSyncStep& step) {
  const auto& a = need_raw(st, step.tag_a, "clock_sync");
  const auto& b = need_raw(st, step.tag_b, "clock_sync");
  ingest::ClockOffsetOptions opts;
  opts.grid_interval = step.grid_interval;
  const auto est = ingest::estimate_clock_offset(a, b, step.max_offset, opts);

  const auto meta = st.dataset.meta.find(step.tag_b);
  if (meta == st.dataset.meta.end())
    throw ValidationError("clock_sync: tag '" + step.tag_b + "' has no meta");
  const std::string source = meta->second.source;

  Json j;
  j["tag_a"] = step.tag_a;
  j["tag_b"] = step.tag_b;
  j["source"] = source;
  j["offset_us"] = est.offset.us;
  j["confidence"] = est.confidence;
  j["low_confidence"] = est.low_confidence;
  j["applied"] = step.apply;
  st.artifacts["clock_offset_" + step.tag_b + ".json"] = j.dump(2) + "\n";

  if (step.apply) {
    st.dataset = ingest::apply_clock_offset(std::move(st.dataset), source, -est.offset);
    // gridded copies of that source are stale now
    for (const auto& [tag, m] : st.dataset.meta) {
      if (m.source == source) st.gridded.erase(tag);
    }
  }
}

void exec_outliers(State& st, const OutlierStep& step, diag::Severity static_severity) {
  for (const auto& tag : step.tags) {
    const auto& g = need_gridded(st, tag, "outliers");
    std::vector<size_t> idx;
    if (step.params.window) {
      idx = cleanse::detect_outliers_moving(g, step.params);
    } else {
      auto res = cleanse::detect_outliers_global(g, step.params);
      idx = std::move(res.indices);
      if (res.degenerate_constant) {
        diag::Finding f;
        f.tags = {tag};
        f.kind = diag::FindingKind::StaticTag;
        f.severity = static_severity;
        f.evidence.push_back({"stddev", 0.0});
        f.message = "tag '" + tag +
                    "' has zero variance (constant series); outlier test degenerate";
        st.findings.push_back(std::move(f));
      }
    }
    st.outlier_counts[tag] += idx.size();
    if (step.drop && !idx.empty()) {
      std::vector<std::optional<double>> vals(g.values().begin(), g.values().end());
      for (const size_t i : idx) vals[i].reset();
      st.gridded.insert_or_assign(tag, g.with_values(std::move(vals)));
    }
  }
}

void exec_static(State& st, const StaticStep& step, diag::Severity severity) {
  for (const auto& tag : step.tags) {
    const auto& g = need_gridded(st, tag, "static");
    const auto segs = cleanse::detect_static(g, step.noise_band, step.min_duration);
    if (!segs.empty()) {
      diag::Finding f;
      f.tags = {tag};
      f.kind = diag::FindingKind::StaticTag;
      f.severity = severity;
      f.evidence.push_back({"static_segments", static_cast<double>(segs.size())});
      f.segments = segs;
      f.message = "tag '" + tag + "' is static (no excitation) in " +
                  std::to_string(segs.size()) + " stretch(es)";
      st.findings.push_back(std::move(f));
    }
    add_segments(st, tag, segs);
  }
}

void exec_compression(State& st, const CompressionStep& step, diag::Severity severity) {
  for (const auto& tag : step.tags) {
    const auto& s = need_raw(st, tag, "compression");
    Duration scan = step.nominal_scan;
    if (scan.us <= 0) {
      const auto meta = st.dataset.meta.find(tag);
      if (meta == st.dataset.meta.end() || !meta->second.scan_interval)
        throw ValidationError("compression: tag '" + tag +
                              "' has no nominal_scan and no scan_interval in meta");
      scan = *meta->second.scan_interval;
    }
    const auto finding = cleanse::detect_compression(s, scan, step.params);
    if (finding.suspected) {
      diag::Finding f;
      f.tags = {tag};
      f.kind = diag::FindingKind::CompressionSuspected;
      f.severity = severity;
      f.evidence.push_back({"archival_ratio", finding.archival_ratio});
      f.evidence.push_back({"linear_fraction", finding.linear_fraction});
      Segment seg;
      seg.start = s.front().t;
      seg.end = s.back().t + Duration{1};
      seg.label = SegmentLabel::Compressed;
      seg.evidence = finding.archival_ratio;
      f.segments.push_back(seg);
      f.message = "tag '" + tag + "' looks compression-affected (archival ratio " +
                  ingest::format_double(finding.archival_ratio) + ", linear fraction " +
                  ingest::format_double(finding.linear_fraction) + ")";
      st.findings.push_back(std::move(f));
      add_segments(st, tag, {seg});
    }
  }
}

void exec_steady(State& st, const SteadyStep& step) {
  steady::RStatParams params = step.params;
  if (step.auto_rcrit)
    params.r_crit = steady::calibrate_rcrit(params, step.alpha, step.mc_samples,
                                            step.mc_seed);
  for (const auto& tag : step.tags) {
    const auto& g = need_gridded(st, tag, "steady");
    add_segments(st, tag, steady::segment_steady(g, params));
  }
}

void exec_trim(State& st, const TrimStep& step) {
  std::vector<GriddedSeries> tags;
  for (const auto& tag : step.tags) tags.push_back(need_gridded(st, tag, "trim_unexcited"));
  const auto drops =
      steady::trim_unexcited(tags, step.params, step.margin, step.min_length);
  for (const auto& tag : step.tags) {
    add_segments(st, tag, drops);
    if (step.apply && !drops.empty()) {
      st.gridded.insert_or_assign(
          tag, apply_segments(st.gridded.at(tag), drops, SegmentAction::Drop));
    }
  }
}

void exec_delay(State& st, const DelayStep& step) {
  const auto& u = need_gridded(st, step.input, "delay");
  const auto& y = need_gridded(st, step.output, "delay");
  align::DelayOptions opts;
  opts.allow_negative = step.allow_negative;
  const auto est = align::estimate_delay(u, y, step.max_lag, opts);
  Json j;
  j["input"] = step.input;
  j["output"] = step.output;
  j["lag_steps"] = est.lag;
  j["lag_us"] = est.lag_duration.us;
  j["peak_corr"] = est.peak_corr;
  j["confident"] = est.confident;
  j["applied_shift"] = step.apply_shift;
  st.artifacts["delay_" + step.input + "_" + step.output + ".json"] = j.dump(2) + "\n";
  if (step.apply_shift)
    st.gridded.insert_or_assign(step.input, align::apply_shift(u, est.lag));
}

void exec_lab(State& st, const LabStep& step, diag::Severity stale_severity) {
  const auto& indicator = need_raw(st, step.indicator, "lab");
  const auto& results = need_raw(st, step.results, "lab");
  const RawSeries* acceptance = nullptr;
  if (step.acceptance) acceptance = &need_raw(st, *step.acceptance, "lab");

  const auto parsed = align::parse_lab_events(indicator, results, acceptance,
                                              step.accept_window, step.delta_t);
  std::vector<align::Residual> residuals;
  if (step.predictions) {
    const auto& pred = need_gridded(st, *step.predictions, "lab");
    auto res = align::compute_residuals(pred, parsed.events);
    residuals = std::move(res.residuals);
  }

  std::ostringstream audit;
  for (const auto& w : parsed.warnings) audit << "# warning: " << w << '\n';
  for (const auto& t : parsed.incomplete)
    audit << "# incomplete: cycle open since " << format_iso8601(t) << '\n';
  std::ostringstream body;
  align::write_lab_audit_csv(body, parsed.events, residuals, step.bias_alpha);
  audit << body.str();
  st.artifacts["lab_" + step.indicator + ".csv"] = audit.str();

  if (step.stale_horizon) {
    Timestamp dataset_end{INT64_MIN};
    for (const auto& [tag, s] : st.dataset.series) {
      (void)tag;
      if (!s.empty()) dataset_end = std::max(dataset_end, s.back().t);
    }
    std::optional<Timestamp> last_accepted;
    for (const auto& ev : parsed.events)
      if (ev.accepted) last_accepted = ev.result_time;
    const bool stale =
        !last_accepted || (dataset_end - *last_accepted) > *step.stale_horizon;
    if (stale) {
      diag::Finding f;
      f.tags = {step.indicator};
      f.kind = diag::FindingKind::StaleBias;
      f.severity = stale_severity;
      const double age_s = last_accepted
                               ? (dataset_end - *last_accepted).seconds()
                               : -1.0;
      f.evidence.push_back({"staleness_s", age_s});
      f.message = last_accepted
                      ? "last accepted lab sample is " +
                            format_duration(dataset_end - *last_accepted) +
                            " old; bias correction is stale"
                      : "no accepted lab samples; bias correction never updated";
      st.findings.push_back(std::move(f));
    }
  }
}

void exec_loop_mode(State& st, const LoopModeStep& step) {
  const auto& s = need_raw(st, step.tag, "loop_mode");
  const auto segs = diag::segment_loop_mode(s, step.mode_map);
  st.loop_segments[step.tag] = segs;
  add_segments(st, step.tag, segs);
}

void exec_sign_check(State& st, const SignCheckStep& step) {
  const auto& mv = need_gridded(st, step.mv, "sign_check");
  const auto& cv = need_gridded(st, step.cv, "sign_check");
  const auto it = st.loop_segments.find(step.mode_tag);
  if (it == st.loop_segments.end())
    throw ValidationError("sign_check: mode tag '" + step.mode_tag +
                          "' has no loop segments; add a loop_mode step first");
  diag::SignCheckOptions opts;
  opts.min_pairs = step.min_pairs;
  opts.differenced = step.differenced;
  auto findings =
      diag::closed_loop_sign_check(mv, cv, it->second, step.expected_sign, opts);
  st.findings.insert(st.findings.end(), findings.begin(), findings.end());
}

diag::Severity severity_for(const PipelineConfig& cfg, diag::FindingKind kind) {
  const auto it = cfg.severity_policy.find(to_string(kind));
  return it != cfg.severity_policy.end() ? it->second : default_severity(kind);
}

} // namespace

RunResult run_pipeline_on(ingest::Dataset dataset, const PipelineConfig& cfg,
                          const std::string& base_dir) {
  State st;
  st.dataset = std::move(dataset);

  // tag meta overrides
  for (const auto& [tag, meta] : cfg.tag_meta) {
    const auto it = st.dataset.meta.find(tag);
    if (it == st.dataset.meta.end())
      throw ValidationError("config.dataset.tag_meta: tag '" + tag +
                            "' not present after ingest");
    TagMeta merged = meta;
    merged.source = it->second.source;
    st.dataset.meta[tag] = merged;
  }
  st.dataset.validate();

  std::map<TagId, diag::TagSummary> summaries;

  for (const auto& step : cfg.steps) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, GridStep>) exec_grid(st, s);
          else if constexpr (std::is_same_v<T, ResolutionStep>)
            exec_resolution(st, s, summaries,
                            severity_for(cfg, diag::FindingKind::ResolutionMismatch));
          else if constexpr (std::is_same_v<T, ClockSyncStep>) exec_clock_sync(st, s);
          else if constexpr (std::is_same_v<T, OutlierStep>)
            exec_outliers(st, s, severity_for(cfg, diag::FindingKind::StaticTag));
          else if constexpr (std::is_same_v<T, ModesStep>) {
            const auto& g = need_gridded(st, s.tag, "modes");
            add_segments(st, s.tag,
                         cleanse::partition_modes(g, s.thresholds, s.min_mode_duration));
          } else if constexpr (std::is_same_v<T, ShutdownStep>) {
            const auto& g = need_gridded(st, s.tag, "shutdown");
            const auto res = cleanse::detect_shutdown(g, s.threshold, s.min_duration);
            add_segments(st, s.tag, res.shutdowns);
            add_segments(st, s.tag, res.anomalies);
          } else if constexpr (std::is_same_v<T, StaticStep>)
            exec_static(st, s, severity_for(cfg, diag::FindingKind::StaticTag));
          else if constexpr (std::is_same_v<T, CompressionStep>)
            exec_compression(st, s,
                             severity_for(cfg, diag::FindingKind::CompressionSuspected));
          else if constexpr (std::is_same_v<T, SteadyStep>) exec_steady(st, s);
          else if constexpr (std::is_same_v<T, TrimStep>) exec_trim(st, s);
          else if constexpr (std::is_same_v<T, DelayStep>) exec_delay(st, s);
          else if constexpr (std::is_same_v<T, LabStep>)
            exec_lab(st, s, severity_for(cfg, diag::FindingKind::StaleBias));
          else if constexpr (std::is_same_v<T, CollinearStep>) {
            std::vector<GriddedSeries> tags;
            for (const auto& tag : s.tags)
              tags.push_back(need_gridded(st, tag, "collinear"));
            auto fs = diag::flag_collinear(tags, s.rho_threshold, s.vif_threshold);
            st.findings.insert(st.findings.end(), fs.begin(), fs.end());
          } else if constexpr (std::is_same_v<T, BalanceStep>) {
            std::vector<GriddedSeries> in, out;
            for (const auto& tag : s.in_flows) in.push_back(need_gridded(st, tag, "balance"));
            for (const auto& tag : s.out_flows)
              out.push_back(need_gridded(st, tag, "balance"));
            auto res = diag::balance_closure(in, out, s.window, s.tolerance);
            st.findings.insert(st.findings.end(), res.findings.begin(),
                               res.findings.end());
            std::ostringstream csv;
            ingest::write_gridded_csv(csv, res.imbalance);
            st.artifacts["balance_imbalance.csv"] = csv.str();
          } else if constexpr (std::is_same_v<T, LoopModeStep>) exec_loop_mode(st, s);
          else if constexpr (std::is_same_v<T, SignCheckStep>) exec_sign_check(st, s);
        },
        step);
  }

  // severity policy applies to every finding uniformly
  for (auto& f : st.findings) f.severity = severity_for(cfg, f.kind);

  // per-tag summaries
  for (const auto& [tag, s] : st.dataset.series) {
    auto& sum = summaries[tag];
    sum.sample_count = s.size();
    if (!sum.resolution && s.size() >= 2)
      sum.resolution = ingest::detect_resolution(s).dominant;
    const auto g = st.gridded.find(tag);
    if (g != st.gridded.end() && g->second.size() > 0)
      sum.coverage = static_cast<double>(g->second.present_count()) /
                     static_cast<double>(g->second.size());
    const auto oc = st.outlier_counts.find(tag);
    if (oc != st.outlier_counts.end()) sum.outlier_count = oc->second;
    const auto segs = st.segments.find(tag);
    if (segs != st.segments.end()) sum.segments = segs->second;
  }

  RunResult result;
  result.report = diag::build_report(cfg.dataset_id, std::move(st.findings),
                                     std::move(summaries));

  // artifacts
  const fs::path out_dir = fs::path(base_dir) / cfg.output.dir;
  fs::create_directories(out_dir);
  if (cfg.output.write_gridded) {
    fs::create_directories(out_dir / "gridded");
    for (const auto& [tag, g] : st.gridded) {
      std::ostringstream csv;
      ingest::write_gridded_csv(csv, g);
      st.artifacts[(fs::path("gridded") / (tag + ".csv")).string()] = csv.str();
    }
  }
  if (cfg.output.write_segments) {
    fs::create_directories(out_dir / "segments");
    for (auto& [tag, segs] : st.segments) {
      std::stable_sort(segs.begin(), segs.end(),
                       [](const Segment& a, const Segment& b) {
                         return std::make_tuple(a.start, a.end, segment_label_string(a)) <
                                std::make_tuple(b.start, b.end, segment_label_string(b));
                       });
      st.artifacts[(fs::path("segments") / (tag + ".csv")).string()] = segments_csv(segs);
    }
  }
  std::string report_body = diag::serialize_report(result.report);
  if (cfg.output.stamp) {
    // human-facing convenience only; the canonical body below stays pure
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(now).count();
    report_body = "# generated_at=" + format_iso8601(Timestamp{us}) + "\n" + report_body;
  }
  st.artifacts["report.json"] = std::move(report_body);

  for (const auto& [rel, body] : st.artifacts) {
    const fs::path p = out_dir / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write '" + p.string() + "'");
    f << body;
    result.artifacts.push_back(rel);
  }

  const auto worst = diag::worst_severity(result.report);
  result.exit_code = (worst && *worst == diag::Severity::Error) ? 2 : 0;
  return result;
}

RunResult run_pipeline(const PipelineConfig& cfg, const std::string& base_dir) {
  ingest::Dataset dataset;
  dataset.id = cfg.dataset_id;
  ingest::ParseOptions opts;
  opts.max_error_rate = cfg.max_error_rate;
  for (const auto& in : cfg.inputs) {
    const fs::path path = fs::path(base_dir) / in.file;
    ingest::SourceId source{in.source, in.clock_offset};
    ingest::ParseReport rep;
    ingest::Dataset frag =
        ingest::parse_historian_csv_file(path.string(), source, opts, &rep);
    ingest::merge(dataset, std::move(frag));
    if (in.clock_offset && in.clock_offset->us != 0)
      dataset = ingest::apply_clock_offset(std::move(dataset), in.source, *in.clock_offset);
  }
  return run_pipeline_on(std::move(dataset), cfg, base_dir);
}

} // namespace histprep::pipeline
