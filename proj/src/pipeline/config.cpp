#include "histprep/pipeline/config.hpp"

#include "histprep/core/errors.hpp"

namespace histprep::pipeline {

namespace {

std::vector<TagId> tags_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of tag names");
  std::vector<TagId> tags;
  for (const auto& t : j) tags.push_back(t.get<std::string>());
  return tags;
}

steady::RStatParams rstat_from(const Json& j, const std::string& where) {
  steady::RStatParams p;
  if (j.contains("lambda1")) p.lambda1 = j["lambda1"].get<double>();
  if (j.contains("lambda2")) p.lambda2 = j["lambda2"].get<double>();
  if (j.contains("lambda3")) p.lambda3 = j["lambda3"].get<double>();
  if (j.contains("r_crit") && j["r_crit"].is_number())
    p.r_crit = j["r_crit"].get<double>();
  if (j.contains("hold_count")) p.hold_count = j["hold_count"].get<int>();
  (void)where;
  return p;
}

Step step_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind"))
    throw ParseError(where + ": each step needs a \"kind\"");
  const std::string kind = j["kind"].get<std::string>();

  if (kind == "grid") {
    require_keys_known(j, {"kind", "tags", "interval", "method", "max_gap", "start", "end"},
                       where);
    GridStep s;
    s.tags = tags_from(j.at("tags"), where + ".tags");
    s.interval = duration_from_json(j.at("interval"), where + ".interval");
    if (j.contains("method"))
      s.method = grid_method_from_string(j["method"].get<std::string>());
    if (j.contains("max_gap")) s.max_gap = duration_from_json(j["max_gap"], where + ".max_gap");
    if (j.contains("start")) s.start = timestamp_from_json(j["start"], where + ".start");
    if (j.contains("end")) s.end = timestamp_from_json(j["end"], where + ".end");
    return s;
  }
  if (kind == "resolution") {
    require_keys_known(j, {"kind", "tags", "mismatch_ratio"}, where);
    ResolutionStep s;
    if (j.contains("tags")) s.tags = tags_from(j["tags"], where + ".tags");
    if (j.contains("mismatch_ratio")) s.mismatch_ratio = j["mismatch_ratio"].get<double>();
    return s;
  }
  if (kind == "clock_sync") {
    require_keys_known(j, {"kind", "tag_a", "tag_b", "max_offset", "grid_interval", "apply"},
                       where);
    ClockSyncStep s;
    s.tag_a = j.at("tag_a").get<std::string>();
    s.tag_b = j.at("tag_b").get<std::string>();
    s.max_offset = duration_from_json(j.at("max_offset"), where + ".max_offset");
    if (j.contains("grid_interval"))
      s.grid_interval = duration_from_json(j["grid_interval"], where + ".grid_interval");
    if (j.contains("apply")) s.apply = j["apply"].get<bool>();
    return s;
  }
  if (kind == "outliers") {
    require_keys_known(j, {"kind", "tags", "k", "window", "min_window_points", "drop"},
                       where);
    OutlierStep s;
    s.tags = tags_from(j.at("tags"), where + ".tags");
    if (j.contains("k")) s.params.k = j["k"].get<double>();
    if (j.contains("window"))
      s.params.window = duration_from_json(j["window"], where + ".window");
    if (j.contains("min_window_points"))
      s.params.min_window_points = j["min_window_points"].get<int>();
    if (j.contains("drop")) s.drop = j["drop"].get<bool>();
    return s;
  }
  if (kind == "modes") {
    require_keys_known(j, {"kind", "tag", "thresholds", "min_mode_duration"}, where);
    ModesStep s;
    s.tag = j.at("tag").get<std::string>();
    s.thresholds = j.at("thresholds").get<std::vector<double>>();
    if (j.contains("min_mode_duration"))
      s.min_mode_duration =
          duration_from_json(j["min_mode_duration"], where + ".min_mode_duration");
    return s;
  }
  if (kind == "shutdown") {
    require_keys_known(j, {"kind", "tag", "threshold", "min_duration"}, where);
    ShutdownStep s;
    s.tag = j.at("tag").get<std::string>();
    s.threshold = j.at("threshold").get<double>();
    s.min_duration = duration_from_json(j.at("min_duration"), where + ".min_duration");
    return s;
  }
  if (kind == "static") {
    require_keys_known(j, {"kind", "tags", "noise_band", "min_duration"}, where);
    StaticStep s;
    s.tags = tags_from(j.at("tags"), where + ".tags");
    s.noise_band = j.at("noise_band").get<double>();
    s.min_duration = duration_from_json(j.at("min_duration"), where + ".min_duration");
    return s;
  }
  if (kind == "compression") {
    require_keys_known(j,
                       {"kind", "tags", "nominal_scan", "ratio_threshold",
                        "linear_threshold", "chord_rel_tol", "chord_abs_tol"},
                       where);
    CompressionStep s;
    s.tags = tags_from(j.at("tags"), where + ".tags");
    if (j.contains("nominal_scan"))
      s.nominal_scan = duration_from_json(j["nominal_scan"], where + ".nominal_scan");
    if (j.contains("ratio_threshold"))
      s.params.ratio_threshold = j["ratio_threshold"].get<double>();
    if (j.contains("linear_threshold"))
      s.params.linear_threshold = j["linear_threshold"].get<double>();
    if (j.contains("chord_rel_tol")) s.params.chord_rel_tol = j["chord_rel_tol"].get<double>();
    if (j.contains("chord_abs_tol")) s.params.chord_abs_tol = j["chord_abs_tol"].get<double>();
    return s;
  }
  if (kind == "steady") {
    require_keys_known(j,
                       {"kind", "tags", "lambda1", "lambda2", "lambda3", "r_crit",
                        "hold_count", "alpha", "mc_seed", "mc_samples"},
                       where);
    SteadyStep s;
    s.tags = tags_from(j.at("tags"), where + ".tags");
    s.params = rstat_from(j, where);
    if (j.contains("r_crit") && j["r_crit"].is_string()) {
      if (j["r_crit"].get<std::string>() != "auto")
        throw ParseError(where + ".r_crit: expected a number or \"auto\"");
      s.auto_rcrit = true;
    }
    if (j.contains("alpha")) s.alpha = j["alpha"].get<double>();
    if (j.contains("mc_seed")) s.mc_seed = j["mc_seed"].get<std::uint64_t>();
    if (j.contains("mc_samples")) s.mc_samples = j["mc_samples"].get<std::size_t>();
    return s;
  }
  if (kind == "trim_unexcited") {
    require_keys_known(j,
                       {"kind", "tags", "lambda1", "lambda2", "lambda3", "r_crit",
                        "hold_count", "margin", "min_length", "apply"},
                       where);
    TrimStep s;
    s.tags = tags_from(j.at("tags"), where + ".tags");
    s.params = rstat_from(j, where);
    if (j.contains("margin")) s.margin = duration_from_json(j["margin"], where + ".margin");
    s.min_length = duration_from_json(j.at("min_length"), where + ".min_length");
    if (j.contains("apply")) s.apply = j["apply"].get<bool>();
    return s;
  }
  if (kind == "delay") {
    require_keys_known(
        j, {"kind", "input", "output", "max_lag", "apply_shift", "allow_negative"}, where);
    DelayStep s;
    s.input = j.at("input").get<std::string>();
    s.output = j.at("output").get<std::string>();
    s.max_lag = duration_from_json(j.at("max_lag"), where + ".max_lag");
    if (j.contains("apply_shift")) s.apply_shift = j["apply_shift"].get<bool>();
    if (j.contains("allow_negative")) s.allow_negative = j["allow_negative"].get<bool>();
    return s;
  }
  if (kind == "lab") {
    require_keys_known(j,
                       {"kind", "indicator", "results", "acceptance", "accept_window",
                        "delta_t", "predictions", "bias_alpha", "stale_horizon"},
                       where);
    LabStep s;
    s.indicator = j.at("indicator").get<std::string>();
    s.results = j.at("results").get<std::string>();
    if (j.contains("acceptance")) s.acceptance = j["acceptance"].get<std::string>();
    s.accept_window = duration_from_json(j.at("accept_window"), where + ".accept_window");
    if (j.contains("delta_t")) s.delta_t = duration_from_json(j["delta_t"], where + ".delta_t");
    if (j.contains("predictions")) s.predictions = j["predictions"].get<std::string>();
    if (j.contains("bias_alpha")) s.bias_alpha = j["bias_alpha"].get<double>();
    if (j.contains("stale_horizon"))
      s.stale_horizon = duration_from_json(j["stale_horizon"], where + ".stale_horizon");
    return s;
  }
  if (kind == "collinear") {
    require_keys_known(j, {"kind", "tags", "rho_threshold", "vif_threshold"}, where);
    CollinearStep s;
    s.tags = tags_from(j.at("tags"), where + ".tags");
    if (j.contains("rho_threshold")) s.rho_threshold = j["rho_threshold"].get<double>();
    if (j.contains("vif_threshold")) s.vif_threshold = j["vif_threshold"].get<double>();
    return s;
  }
  if (kind == "balance") {
    require_keys_known(j, {"kind", "in_flows", "out_flows", "window", "tolerance"}, where);
    BalanceStep s;
    s.in_flows = tags_from(j.at("in_flows"), where + ".in_flows");
    s.out_flows = tags_from(j.at("out_flows"), where + ".out_flows");
    s.window = duration_from_json(j.at("window"), where + ".window");
    s.tolerance = j.at("tolerance").get<double>();
    return s;
  }
  if (kind == "loop_mode") {
    require_keys_known(j, {"kind", "tag", "mode_map"}, where);
    LoopModeStep s;
    s.tag = j.at("tag").get<std::string>();
    if (!j.contains("mode_map") || !j["mode_map"].is_object())
      throw ParseError(where + ": loop_mode needs a mode_map object");
    for (const auto& [code, mode] : j["mode_map"].items()) {
      const std::string m = mode.get<std::string>();
      diag::LoopMode lm;
      if (m == "open") lm = diag::LoopMode::OpenLoop;
      else if (m == "closed") lm = diag::LoopMode::ClosedLoop;
      else
        throw ParseError(where + ".mode_map: expected \"open\" or \"closed\", got '" +
                         m + "'");
      s.mode_map[std::stoll(code)] = lm;
    }
    return s;
  }
  if (kind == "sign_check") {
    require_keys_known(
        j, {"kind", "mv", "cv", "mode_tag", "expected_sign", "min_pairs", "differenced"},
        where);
    SignCheckStep s;
    s.mv = j.at("mv").get<std::string>();
    s.cv = j.at("cv").get<std::string>();
    s.mode_tag = j.at("mode_tag").get<std::string>();
    if (j.contains("expected_sign")) {
      const std::string sign = j["expected_sign"].get<std::string>();
      if (sign == "+") s.expected_sign = 1;
      else if (sign == "-") s.expected_sign = -1;
      else
        throw ParseError(where + ".expected_sign: expected \"+\" or \"-\"");
    }
    if (j.contains("min_pairs")) s.min_pairs = j["min_pairs"].get<std::size_t>();
    if (j.contains("differenced")) s.differenced = j["differenced"].get<bool>();
    return s;
  }
  throw ParseError(where + ": unknown step kind '" + kind + "'");
}

TagMeta tag_meta_from(const TagId& tag, const Json& j, const std::string& where) {
  require_keys_known(j, {"unit", "role", "normal_range", "scan_interval"}, where);
  TagMeta m;
  m.tag = tag;
  if (j.contains("unit")) m.unit = j["unit"].get<std::string>();
  if (j.contains("role")) m.role = tag_role_from_string(j["role"].get<std::string>());
  if (j.contains("normal_range")) {
    const auto arr = j["normal_range"];
    if (!arr.is_array() || arr.size() != 2)
      throw ParseError(where + ".normal_range: expected [lo, hi]");
    m.normal_range = {arr[0].get<double>(), arr[1].get<double>()};
  }
  if (j.contains("scan_interval"))
    m.scan_interval = duration_from_json(j["scan_interval"], where + ".scan_interval");
  m.validate();
  return m;
}

} // namespace

diag::Severity default_severity(diag::FindingKind kind) {
  switch (kind) {
    case diag::FindingKind::Collinear: return diag::Severity::Warn;
    case diag::FindingKind::BalanceGap: return diag::Severity::Warn;
    case diag::FindingKind::StaticTag: return diag::Severity::Warn;
    case diag::FindingKind::CompressionSuspected: return diag::Severity::Warn;
    case diag::FindingKind::SignFlip: return diag::Severity::Warn;
    case diag::FindingKind::StaleBias: return diag::Severity::Warn;
    case diag::FindingKind::ResolutionMismatch: return diag::Severity::Warn;
  }
  return diag::Severity::Info;
}

PipelineConfig PipelineConfig::from_json(const Json& j) {
  require_keys_known(j,
                     {"config_schema_version", "dataset", "steps", "output",
                      "severity_policy"},
                     "config");
  PipelineConfig cfg;
  if (j.contains("config_schema_version"))
    cfg.schema_version = j["config_schema_version"].get<int>();
  if (cfg.schema_version != 1)
    throw ParseError("config: unsupported schema version " +
                     std::to_string(cfg.schema_version));

  if (j.contains("dataset")) {
    const auto& jd = j["dataset"];
    require_keys_known(jd, {"id", "inputs", "max_error_rate", "tag_meta"},
                       "config.dataset");
    if (jd.contains("id")) cfg.dataset_id = jd["id"].get<std::string>();
    if (jd.contains("max_error_rate"))
      cfg.max_error_rate = jd["max_error_rate"].get<double>();
    if (jd.contains("inputs")) {
      size_t i = 0;
      for (const auto& je : jd["inputs"]) {
        const std::string where = "config.dataset.inputs[" + std::to_string(i++) + "]";
        require_keys_known(je, {"file", "source", "clock_offset"}, where);
        InputSpec in;
        in.file = je.at("file").get<std::string>();
        in.source = je.at("source").get<std::string>();
        if (je.contains("clock_offset"))
          in.clock_offset = duration_from_json(je["clock_offset"], where + ".clock_offset");
        cfg.inputs.push_back(std::move(in));
      }
    }
    if (jd.contains("tag_meta")) {
      for (const auto& [tag, jm] : jd["tag_meta"].items())
        cfg.tag_meta[tag] = tag_meta_from(tag, jm, "config.dataset.tag_meta." + tag);
    }
  }

  if (j.contains("severity_policy")) {
    for (const auto& [kind, sev] : j["severity_policy"].items()) {
      const std::string s = sev.get<std::string>();
      diag::Severity v;
      if (s == "error") v = diag::Severity::Error;
      else if (s == "warn") v = diag::Severity::Warn;
      else if (s == "info") v = diag::Severity::Info;
      else
        throw ParseError("config.severity_policy." + kind +
                         ": expected error|warn|info");
      cfg.severity_policy[kind] = v;
    }
  }

  if (j.contains("steps")) {
    size_t i = 0;
    for (const auto& js : j["steps"])
      cfg.steps.push_back(step_from_json(js, "config.steps[" + std::to_string(i++) + "]"));
  }

  if (j.contains("output")) {
    const auto& jo = j["output"];
    require_keys_known(jo, {"dir", "write_gridded", "write_segments", "stamp"},
                       "config.output");
    if (jo.contains("dir")) cfg.output.dir = jo["dir"].get<std::string>();
    if (jo.contains("write_gridded"))
      cfg.output.write_gridded = jo["write_gridded"].get<bool>();
    if (jo.contains("write_segments"))
      cfg.output.write_segments = jo["write_segments"].get<bool>();
    if (jo.contains("stamp")) cfg.output.stamp = jo["stamp"].get<bool>();
  }
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  return from_json(load_json_file(path));
}

} // namespace histprep::pipeline
