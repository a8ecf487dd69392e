#include "histprep/synth/scenario.hpp"

#include <cmath>

#include "histprep/core/errors.hpp"
#include "histprep/core/random.hpp"
#include "histprep/ingest/gridding.hpp"

namespace histprep::synth {

namespace {

// Derived-seed streams, one per generated signal.
enum Stream : std::uint64_t {
  kFeed = 1,
  kQual1,
  kQual2,
  kLoop,
  kLab,
  kTemp1,
  kTemp2,
  kTemp3,
  kFlowIn,
  kFlowOut,
};

struct FeedResult {
  GriddedSeries series;
  std::vector<ModeTruth> truth;
};

FeedResult gen_feed(const Scenario& sc, std::size_t n) {
  if (sc.feed.levels.size() < 2 || sc.feed.pattern.empty())
    throw GenerationError("scenario: feed needs >= 2 levels and a non-empty pattern");
  for (int m : sc.feed.pattern) {
    if (m < 0 || static_cast<size_t>(m) >= sc.feed.levels.size())
      throw GenerationError("scenario: feed pattern index out of range");
  }
  const std::size_t dwell_slots =
      std::max<std::size_t>(1, static_cast<std::size_t>(sc.feed.dwell / sc.interval));
  rng::Engine eng(rng::derive_seed(sc.seed, kFeed));
  std::vector<std::optional<double>> vals(n);
  FeedResult out;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t block = k / dwell_slots;
    const int mode = sc.feed.pattern[block % sc.feed.pattern.size()];
    vals[k] = sc.feed.levels[static_cast<size_t>(mode)] +
              eng.normal(0.0, sc.feed.noise_sigma);
    const Timestamp t = sc.start + sc.interval * static_cast<std::int64_t>(k);
    if (out.truth.empty() || out.truth.back().mode != mode) {
      if (!out.truth.empty()) out.truth.back().end = t;
      out.truth.push_back({t, t, mode});
    }
  }
  out.truth.back().end = sc.start + sc.interval * static_cast<std::int64_t>(n);
  out.series = GriddedSeries("FEED", sc.start, sc.interval, std::move(vals));
  return out;
}

GriddedSeries gen_sine(const TagId& tag, const Scenario& sc, std::size_t n,
                       double base, double amplitude, Duration period,
                       double noise_sigma, std::uint64_t stream) {
  rng::Engine eng(rng::derive_seed(sc.seed, stream));
  std::vector<std::optional<double>> vals(n);
  const double w = 2.0 * 3.14159265358979323846 / period.seconds();
  for (std::size_t k = 0; k < n; ++k) {
    const double t = sc.interval.seconds() * static_cast<double>(k);
    vals[k] = base + amplitude * std::sin(w * t) + eng.normal(0.0, noise_sigma);
  }
  return GriddedSeries(tag, sc.start, sc.interval, std::move(vals));
}

TagMeta meta(const TagId& tag, TagRole role, const std::string& source,
             const std::string& unit, Duration scan) {
  TagMeta m;
  m.tag = tag;
  m.role = role;
  m.source = source;
  m.unit = unit;
  m.scan_interval = scan;
  return m;
}

} // namespace

std::vector<DefectSpec> default_defects(const Scenario& sc) {
  std::vector<DefectSpec> defects;
  defects.push_back({Spike{{sc.start + hours(6), sc.start + hours(30)}, {60.0, -50.0}},
                     "FEED"});
  defects.push_back({StuckSensor{sc.start + hours(20), hours(6)}, "TI103"});
  defects.push_back({ClockSkew{seconds(90)}, "TI102"});
  defects.push_back({SwingingDoorCompression{2.0 * sc.quality2.noise_sigma}, "QUAL2"});
  defects.push_back({Miscalibration{0.97}, "FI_OUT"});
  return defects;
}

Scenario full_demo_scenario() { return Scenario{}; }

ScenarioOutput generate_scenario(const Scenario& sc) {
  if (sc.interval.us <= 0 || sc.duration.us <= 0)
    throw GenerationError("scenario: interval and duration must be positive");
  const std::size_t n = static_cast<std::size_t>(sc.duration / sc.interval);
  if (n < 10) throw GenerationError("scenario: duration too short for the grid");

  ScenarioOutput out;
  ingest::Dataset& d = out.dataset;
  TruthManifest& manifest = out.manifest;
  d.id = sc.id;
  d.sources.push_back(ingest::SourceId{"dcs", std::nullopt});
  d.sources.push_back(ingest::SourceId{"analyzer", std::nullopt});

  // feed with mode truth
  FeedResult feed = gen_feed(sc, n);
  manifest.mode_truth["FEED"] = feed.truth;
  d.put(ingest::to_raw(feed.series),
        meta("FEED", TagRole::Flow, "dcs", "t/h", sc.interval));

  // quality paths driven by the feed
  const GriddedSeries qual1 =
      gen_foptd(sc.quality1, feed.series, rng::derive_seed(sc.seed, kQual1), "QUAL1");
  const GriddedSeries qual2 =
      gen_foptd(sc.quality2, feed.series, rng::derive_seed(sc.seed, kQual2), "QUAL2");
  manifest.dead_steps["QUAL1"] = foptd_dead_steps(sc.quality1, sc.interval);
  manifest.dead_steps["QUAL2"] = foptd_dead_steps(sc.quality2, sc.interval);
  d.put(ingest::to_raw(qual1), meta("QUAL1", TagRole::CV, "dcs", "%", sc.interval));
  d.put(ingest::to_raw(qual2), meta("QUAL2", TagRole::CV, "dcs", "%", sc.interval));

  // soft-sensor prediction: the true quality plus a constant bias the
  // alignment machinery is supposed to estimate away
  {
    std::vector<std::optional<double>> vals(qual1.values().begin(), qual1.values().end());
    for (auto& v : vals)
      if (v) *v += sc.prediction_offset;
    d.put(ingest::to_raw(GriddedSeries("PRED", sc.start, sc.interval, std::move(vals))),
          meta("PRED", TagRole::Prediction, "dcs", "%", sc.interval));
  }

  // closed PI loop
  {
    std::vector<std::optional<double>> sp(n, sc.loop.setpoint);
    const GriddedSeries setpoint("SP", sc.start, sc.interval, std::move(sp));
    LoopResult loop = gen_closed_loop(sc.loop.plant, sc.loop.pi, setpoint,
                                      sc.loop.disturbance_sigma,
                                      rng::derive_seed(sc.seed, kLoop));
    manifest.dead_steps["CV"] = foptd_dead_steps(sc.loop.plant, sc.interval);
    manifest.loop_mode_truth["LOOP_MODE"] = {{sc.start, 1}}; // AUTO throughout
    d.put(ingest::to_raw(loop.mv.with_tag("MV")),
          meta("MV", TagRole::MV, "dcs", "%", sc.interval));
    d.put(ingest::to_raw(loop.cv.with_tag("CV")),
          meta("CV", TagRole::CV, "dcs", "degC", sc.interval));
    RawSeries mode("LOOP_MODE",
                   std::vector<RawSample>(loop.mode.samples().begin(),
                                          loop.mode.samples().end()));
    d.put(std::move(mode), meta("LOOP_MODE", TagRole::LoopMode, "dcs", "", sc.interval));
  }

  // redundant temperatures; TI102 lives on the analyzer source
  d.put(ingest::to_raw(gen_sine("TI101", sc, n, sc.temps.base, sc.temps.amplitude,
                                sc.temps.period, sc.temps.noise_sigma, kTemp1)),
        meta("TI101", TagRole::Other, "dcs", "degC", sc.interval));
  d.put(ingest::to_raw(gen_sine("TI102", sc, n, sc.temps.base, sc.temps.amplitude,
                                sc.temps.period, sc.temps.noise_sigma, kTemp2)),
        meta("TI102", TagRole::Other, "analyzer", "degC", sc.interval));
  d.put(ingest::to_raw(gen_sine("TI103", sc, n, sc.temps.base, sc.temps.amplitude,
                                sc.temps.period, sc.temps.noise_sigma, kTemp3)),
        meta("TI103", TagRole::Other, "dcs", "degC", sc.interval));

  // flow pair for balance closure
  {
    rng::Engine ein(rng::derive_seed(sc.seed, kFlowIn));
    rng::Engine eout(rng::derive_seed(sc.seed, kFlowOut));
    std::vector<std::optional<double>> in_vals(n), out_vals(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double base = sc.flows.base + ein.normal(0.0, sc.flows.noise_sigma);
      in_vals[k] = base;
      out_vals[k] = base + eout.normal(0.0, sc.flows.noise_sigma);
    }
    d.put(ingest::to_raw(GriddedSeries("FI_IN", sc.start, sc.interval, std::move(in_vals))),
          meta("FI_IN", TagRole::Flow, "dcs", "t/h", sc.interval));
    d.put(ingest::to_raw(GriddedSeries("FI_OUT", sc.start, sc.interval, std::move(out_vals))),
          meta("FI_OUT", TagRole::Flow, "dcs", "t/h", sc.interval));
  }

  // lab channel sampling the first quality path
  {
    std::vector<Timestamp> schedule;
    for (Timestamp t = sc.start + sc.lab.period; t + sc.lab.channel.result_delay_hi <
                                                 sc.start + sc.duration;
         t = t + sc.lab.period)
      schedule.push_back(t);
    if (schedule.empty())
      throw GenerationError("scenario: duration too short for any lab cycle");
    LabChannel lab = gen_lab_channel(qual1, schedule, sc.lab.channel,
                                     rng::derive_seed(sc.seed, kLab));
    manifest.lab_truth["LAB_I"] = lab.truth;
    d.put(RawSeries("LAB_I", std::vector<RawSample>(lab.indicator.samples().begin(),
                                                    lab.indicator.samples().end())),
          meta("LAB_I", TagRole::LabIndicator, "dcs", "", {}));
    d.put(RawSeries("LAB_RESULT", std::vector<RawSample>(lab.results.samples().begin(),
                                                         lab.results.samples().end())),
          meta("LAB_RESULT", TagRole::LabResult, "dcs", "%", {}));
    d.put(RawSeries("LAB_ACCEPT", std::vector<RawSample>(lab.acceptance.samples().begin(),
                                                         lab.acceptance.samples().end())),
          meta("LAB_ACCEPT", TagRole::LabAcceptance, "dcs", "", {}));
  }

  // defects last, so they apply to the finished dataset
  const std::vector<DefectSpec> defects =
      sc.defects.empty() ? default_defects(sc) : sc.defects;
  auto [dataset, defect_manifest] = inject_defects(std::move(d), defects, sc.seed);
  out.dataset = std::move(dataset);
  manifest.defects = std::move(defect_manifest.defects);
  manifest.clock_skew = std::move(defect_manifest.clock_skew);
  return out;
}

// ---- JSON round trip ----

namespace {

Json foptd_json(const FoptdParams& p) {
  Json j;
  j["gain"] = p.gain;
  j["time_constant"] = format_duration(p.time_constant);
  j["dead_time"] = format_duration(p.dead_time);
  j["noise_sigma"] = p.noise_sigma;
  return j;
}

FoptdParams foptd_from_json(const Json& j, const std::string& where) {
  require_keys_known(j, {"gain", "time_constant", "dead_time", "noise_sigma"}, where);
  FoptdParams p;
  if (j.contains("gain")) p.gain = j["gain"].get<double>();
  if (j.contains("time_constant"))
    p.time_constant = duration_from_json(j["time_constant"], where + ".time_constant");
  if (j.contains("dead_time"))
    p.dead_time = duration_from_json(j["dead_time"], where + ".dead_time");
  if (j.contains("noise_sigma")) p.noise_sigma = j["noise_sigma"].get<double>();
  return p;
}

Json defect_json(const DefectSpec& spec) {
  Json j;
  j["kind"] = defect_kind_name(spec);
  j["target"] = spec.target;
  if (const auto* c = std::get_if<SwingingDoorCompression>(&spec.kind)) {
    j["deviation"] = c->deviation;
  } else if (const auto* c2 = std::get_if<StuckSensor>(&spec.kind)) {
    j["start"] = format_iso8601(c2->start);
    j["duration"] = format_duration(c2->duration);
  } else if (const auto* c3 = std::get_if<Spike>(&spec.kind)) {
    Json times = Json::array();
    for (const auto& t : c3->times) times.push_back(format_iso8601(t));
    j["times"] = std::move(times);
    j["magnitudes"] = c3->magnitudes;
  } else if (const auto* c4 = std::get_if<ClockSkew>(&spec.kind)) {
    j["offset"] = format_duration(c4->offset);
  } else if (const auto* c5 = std::get_if<Miscalibration>(&spec.kind)) {
    j["scale"] = c5->scale;
  }
  return j;
}

DefectSpec defect_from_json(const Json& j, const std::string& where) {
  require_keys_known(
      j, {"kind", "target", "deviation", "start", "duration", "times", "magnitudes",
          "offset", "scale"},
      where);
  const std::string kind = j.at("kind").get<std::string>();
  DefectSpec spec;
  spec.target = j.at("target").get<std::string>();
  if (kind == "swinging_door_compression") {
    spec.kind = SwingingDoorCompression{j.at("deviation").get<double>()};
  } else if (kind == "stuck_sensor") {
    spec.kind = StuckSensor{timestamp_from_json(j.at("start"), where + ".start"),
                            duration_from_json(j.at("duration"), where + ".duration")};
  } else if (kind == "spike") {
    Spike sp;
    for (const auto& t : j.at("times"))
      sp.times.push_back(timestamp_from_json(t, where + ".times"));
    sp.magnitudes = j.at("magnitudes").get<std::vector<double>>();
    spec.kind = std::move(sp);
  } else if (kind == "clock_skew") {
    spec.kind = ClockSkew{duration_from_json(j.at("offset"), where + ".offset")};
  } else if (kind == "miscalibration") {
    spec.kind = Miscalibration{j.at("scale").get<double>()};
  } else {
    throw ParseError(where + ": unknown defect kind '" + kind + "'");
  }
  return spec;
}

} // namespace

Json Scenario::to_json() const {
  Json j;
  j["scenario_schema_version"] = schema_version;
  j["id"] = id;
  j["start"] = format_iso8601(start);
  j["interval"] = format_duration(interval);
  j["duration"] = format_duration(duration);
  j["seed"] = seed;
  Json jf;
  jf["levels"] = feed.levels;
  jf["pattern"] = feed.pattern;
  jf["dwell"] = format_duration(feed.dwell);
  jf["noise_sigma"] = feed.noise_sigma;
  jf["thresholds"] = feed.thresholds;
  j["feed"] = std::move(jf);
  j["quality1"] = foptd_json(quality1);
  j["quality2"] = foptd_json(quality2);
  Json jl;
  jl["plant"] = foptd_json(loop.plant);
  jl["kp"] = loop.pi.kp;
  jl["ki"] = loop.pi.ki;
  jl["setpoint"] = loop.setpoint;
  jl["disturbance_sigma"] = loop.disturbance_sigma;
  j["loop"] = std::move(jl);
  Json jb;
  jb["period"] = format_duration(lab.period);
  jb["result_delay_lo"] = format_duration(lab.channel.result_delay_lo);
  jb["result_delay_hi"] = format_duration(lab.channel.result_delay_hi);
  jb["reject_fraction"] = lab.channel.reject_fraction;
  jb["meas_sigma"] = lab.channel.meas_sigma;
  jb["pulse_width"] = format_duration(lab.channel.pulse_width);
  j["lab"] = std::move(jb);
  Json jt;
  jt["base"] = temps.base;
  jt["amplitude"] = temps.amplitude;
  jt["period"] = format_duration(temps.period);
  jt["noise_sigma"] = temps.noise_sigma;
  j["temps"] = std::move(jt);
  Json jw;
  jw["base"] = flows.base;
  jw["noise_sigma"] = flows.noise_sigma;
  j["flows"] = std::move(jw);
  j["prediction_offset"] = prediction_offset;
  Json jd = Json::array();
  for (const auto& spec : defects.empty() ? default_defects(*this) : defects)
    jd.push_back(defect_json(spec));
  j["defects"] = std::move(jd);
  return j;
}

Scenario Scenario::from_json(const Json& j) {
  require_keys_known(j,
                     {"scenario_schema_version", "id", "start", "interval", "duration",
                      "seed", "feed", "quality1", "quality2", "loop", "lab", "temps",
                      "flows", "prediction_offset", "defects"},
                     "scenario");
  Scenario sc;
  if (j.contains("scenario_schema_version"))
    sc.schema_version = j["scenario_schema_version"].get<int>();
  if (sc.schema_version != 1)
    throw ParseError("scenario: unsupported schema version " +
                     std::to_string(sc.schema_version));
  if (j.contains("id")) sc.id = j["id"].get<std::string>();
  if (j.contains("start")) sc.start = timestamp_from_json(j["start"], "scenario.start");
  if (j.contains("interval"))
    sc.interval = duration_from_json(j["interval"], "scenario.interval");
  if (j.contains("duration"))
    sc.duration = duration_from_json(j["duration"], "scenario.duration");
  if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("feed")) {
    const auto& jf = j["feed"];
    require_keys_known(jf, {"levels", "pattern", "dwell", "noise_sigma", "thresholds"},
                       "scenario.feed");
    if (jf.contains("levels")) sc.feed.levels = jf["levels"].get<std::vector<double>>();
    if (jf.contains("pattern")) sc.feed.pattern = jf["pattern"].get<std::vector<int>>();
    if (jf.contains("dwell"))
      sc.feed.dwell = duration_from_json(jf["dwell"], "scenario.feed.dwell");
    if (jf.contains("noise_sigma")) sc.feed.noise_sigma = jf["noise_sigma"].get<double>();
    if (jf.contains("thresholds"))
      sc.feed.thresholds = jf["thresholds"].get<std::vector<double>>();
  }
  if (j.contains("quality1")) sc.quality1 = foptd_from_json(j["quality1"], "scenario.quality1");
  if (j.contains("quality2")) sc.quality2 = foptd_from_json(j["quality2"], "scenario.quality2");
  if (j.contains("loop")) {
    const auto& jl = j["loop"];
    require_keys_known(jl, {"plant", "kp", "ki", "setpoint", "disturbance_sigma"},
                       "scenario.loop");
    if (jl.contains("plant")) sc.loop.plant = foptd_from_json(jl["plant"], "scenario.loop.plant");
    if (jl.contains("kp")) sc.loop.pi.kp = jl["kp"].get<double>();
    if (jl.contains("ki")) sc.loop.pi.ki = jl["ki"].get<double>();
    if (jl.contains("setpoint")) sc.loop.setpoint = jl["setpoint"].get<double>();
    if (jl.contains("disturbance_sigma"))
      sc.loop.disturbance_sigma = jl["disturbance_sigma"].get<double>();
  }
  if (j.contains("lab")) {
    const auto& jb = j["lab"];
    require_keys_known(jb,
                       {"period", "result_delay_lo", "result_delay_hi",
                        "reject_fraction", "meas_sigma", "pulse_width"},
                       "scenario.lab");
    if (jb.contains("period"))
      sc.lab.period = duration_from_json(jb["period"], "scenario.lab.period");
    if (jb.contains("result_delay_lo"))
      sc.lab.channel.result_delay_lo =
          duration_from_json(jb["result_delay_lo"], "scenario.lab.result_delay_lo");
    if (jb.contains("result_delay_hi"))
      sc.lab.channel.result_delay_hi =
          duration_from_json(jb["result_delay_hi"], "scenario.lab.result_delay_hi");
    if (jb.contains("reject_fraction"))
      sc.lab.channel.reject_fraction = jb["reject_fraction"].get<double>();
    if (jb.contains("meas_sigma"))
      sc.lab.channel.meas_sigma = jb["meas_sigma"].get<double>();
    if (jb.contains("pulse_width"))
      sc.lab.channel.pulse_width =
          duration_from_json(jb["pulse_width"], "scenario.lab.pulse_width");
  }
  if (j.contains("temps")) {
    const auto& jt = j["temps"];
    require_keys_known(jt, {"base", "amplitude", "period", "noise_sigma"}, "scenario.temps");
    if (jt.contains("base")) sc.temps.base = jt["base"].get<double>();
    if (jt.contains("amplitude")) sc.temps.amplitude = jt["amplitude"].get<double>();
    if (jt.contains("period"))
      sc.temps.period = duration_from_json(jt["period"], "scenario.temps.period");
    if (jt.contains("noise_sigma")) sc.temps.noise_sigma = jt["noise_sigma"].get<double>();
  }
  if (j.contains("flows")) {
    const auto& jw = j["flows"];
    require_keys_known(jw, {"base", "noise_sigma"}, "scenario.flows");
    if (jw.contains("base")) sc.flows.base = jw["base"].get<double>();
    if (jw.contains("noise_sigma")) sc.flows.noise_sigma = jw["noise_sigma"].get<double>();
  }
  if (j.contains("prediction_offset"))
    sc.prediction_offset = j["prediction_offset"].get<double>();
  if (j.contains("defects")) {
    size_t i = 0;
    for (const auto& e : j["defects"])
      sc.defects.push_back(defect_from_json(e, "scenario.defects[" + std::to_string(i++) + "]"));
  }
  return sc;
}

} // namespace histprep::synth
