#include "histprep/synth/defects.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "histprep/core/errors.hpp"

namespace histprep::synth {

const char* defect_kind_name(const DefectSpec& spec) {
  struct Visitor {
    const char* operator()(const SwingingDoorCompression&) const {
      return "swinging_door_compression";
    }
    const char* operator()(const StuckSensor&) const { return "stuck_sensor"; }
    const char* operator()(const Spike&) const { return "spike"; }
    const char* operator()(const ClockSkew&) const { return "clock_skew"; }
    const char* operator()(const Miscalibration&) const { return "miscalibration"; }
  };
  return std::visit(Visitor{}, spec.kind);
}

RawSeries swinging_door(const RawSeries& s, double deviation) {
  if (deviation < 0)
    throw GenerationError("swinging_door: deviation must be >= 0");
  if (deviation == 0.0 || s.size() <= 2) return s; // degenerate door keeps all

  const auto samples = s.samples();
  std::vector<RawSample> archived;

  size_t i = 0;
  // leading missing markers pass straight through
  while (i < samples.size() && !samples[i].value) archived.push_back(samples[i++]);
  if (i >= samples.size()) return RawSeries(s.tag(), std::move(archived));

  // `pivot` is the last archived good sample; `snapshot` is the most recent
  // sample proven to be a valid segment endpoint, i.e. the chord pivot ->
  // snapshot covers every intermediate within the deviation.
  size_t pivot = i;
  archived.push_back(samples[pivot]);
  ++i;

  std::optional<size_t> snapshot;
  double max_low = -std::numeric_limits<double>::infinity();
  double min_up = std::numeric_limits<double>::infinity();
  auto reset_doors = [&]() {
    snapshot.reset();
    max_low = -std::numeric_limits<double>::infinity();
    min_up = std::numeric_limits<double>::infinity();
  };

  while (i < samples.size()) {
    const auto& p = samples[i];
    if (!p.value) {
      // missing markers break the door: archive what we hold, pass the
      // markers through, restart at the next good sample
      if (snapshot) archived.push_back(samples[*snapshot]);
      archived.push_back(p);
      ++i;
      while (i < samples.size() && !samples[i].value) archived.push_back(samples[i++]);
      if (i < samples.size()) {
        pivot = i;
        archived.push_back(samples[pivot]);
        ++i;
      }
      reset_doors();
      continue;
    }
    const double dt = static_cast<double>((p.t - samples[pivot].t).us);
    const double v0 = *samples[pivot].value;
    const double slope = (*p.value - v0) / dt;
    if (snapshot && (slope < max_low || slope > min_up)) {
      // chord pivot -> p cannot cover the held points: close the door at the
      // snapshot and reprocess p against the new pivot
      archived.push_back(samples[*snapshot]);
      pivot = *snapshot;
      reset_doors();
      continue;
    }
    max_low = std::max(max_low, (*p.value - deviation - v0) / dt);
    min_up = std::min(min_up, (*p.value + deviation - v0) / dt);
    snapshot = i;
    ++i;
  }
  if (snapshot && *snapshot != pivot) archived.push_back(samples[*snapshot]);
  return RawSeries(s.tag(), std::move(archived));
}

namespace {

RawSeries stuck_sensor(const RawSeries& s, const StuckSensor& spec) {
  std::vector<RawSample> out(s.samples().begin(), s.samples().end());
  const Timestamp end = spec.start + spec.duration;
  std::optional<double> frozen;
  for (auto& smp : out) {
    if (smp.t < spec.start) {
      if (smp.value) frozen = smp.value;
      continue;
    }
    if (smp.t >= end) break;
    if (!frozen && smp.value) frozen = smp.value; // freeze at first value inside
    if (frozen && smp.value) smp.value = frozen;
  }
  return RawSeries(s.tag(), std::move(out));
}

RawSeries add_spikes(const RawSeries& s, const Spike& spec, DefectRecord& rec) {
  if (spec.times.size() != spec.magnitudes.size())
    throw GenerationError("inject_defects: spike times/magnitudes length mismatch");
  std::vector<RawSample> out(s.samples().begin(), s.samples().end());
  for (size_t k = 0; k < spec.times.size(); ++k) {
    // nearest present sample takes the impulse
    std::optional<size_t> best;
    for (size_t i = 0; i < out.size(); ++i) {
      if (!out[i].value) continue;
      if (!best || std::llabs((out[i].t - spec.times[k]).us) <
                       std::llabs((out[*best].t - spec.times[k]).us))
        best = i;
    }
    if (!best)
      throw GenerationError("inject_defects: spike target '" + s.tag() +
                            "' has no present samples");
    out[*best].value = *out[*best].value + spec.magnitudes[k];
    rec.times.push_back(out[*best].t);
  }
  return RawSeries(s.tag(), std::move(out));
}

} // namespace

std::pair<ingest::Dataset, TruthManifest>
inject_defects(ingest::Dataset d, std::span<const DefectSpec> specs, std::uint64_t seed) {
  (void)seed; // defects are currently parameter-deterministic
  TruthManifest manifest;
  std::set<TagId> touched;

  for (const auto& spec : specs) {
    const auto it = d.series.find(spec.target);
    if (it == d.series.end())
      throw GenerationError("inject_defects: unknown target tag '" + spec.target + "'");
    if (!touched.insert(spec.target).second)
      throw GenerationError("inject_defects: conflicting defects on tag '" +
                            spec.target + "'");

    DefectRecord rec;
    rec.kind = defect_kind_name(spec);
    rec.target = spec.target;

    if (const auto* c = std::get_if<SwingingDoorCompression>(&spec.kind)) {
      rec.params["deviation"] = c->deviation;
      if (!it->second.empty()) {
        rec.start = it->second.front().t;
        rec.end = it->second.back().t + Duration{1};
      }
      it->second = swinging_door(it->second, c->deviation);
    } else if (const auto* c2 = std::get_if<StuckSensor>(&spec.kind)) {
      if (c2->duration.us <= 0)
        throw GenerationError("inject_defects: stuck sensor duration must be positive");
      rec.start = c2->start;
      rec.end = c2->start + c2->duration;
      it->second = stuck_sensor(it->second, *c2);
    } else if (const auto* c3 = std::get_if<Spike>(&spec.kind)) {
      it->second = add_spikes(it->second, *c3, rec);
      for (size_t k = 0; k < c3->magnitudes.size(); ++k)
        rec.params["magnitude_" + std::to_string(k)] = c3->magnitudes[k];
    } else if (const auto* c4 = std::get_if<ClockSkew>(&spec.kind)) {
      const auto meta = d.meta.find(spec.target);
      if (meta == d.meta.end())
        throw GenerationError("inject_defects: target '" + spec.target + "' has no meta");
      const std::string source = meta->second.source;
      rec.params["offset_us"] = static_cast<double>(c4->offset.us);
      for (auto& [tag, series] : d.series) {
        const auto m = d.meta.find(tag);
        if (m == d.meta.end() || m->second.source != source) continue;
        std::vector<RawSample> shifted(series.samples().begin(), series.samples().end());
        for (auto& smp : shifted) smp.t = smp.t + c4->offset;
        series = RawSeries(tag, std::move(shifted));
        rec.affected.push_back(tag);
      }
      manifest.clock_skew[source] = c4->offset;
    } else if (const auto* c5 = std::get_if<Miscalibration>(&spec.kind)) {
      rec.params["scale"] = c5->scale;
      std::vector<RawSample> scaled(it->second.samples().begin(),
                                    it->second.samples().end());
      for (auto& smp : scaled) {
        if (smp.value) smp.value = *smp.value * c5->scale;
      }
      it->second = RawSeries(spec.target, std::move(scaled));
    }
    manifest.defects.push_back(std::move(rec));
  }
  return {std::move(d), std::move(manifest)};
}

// ---- manifest serialization ----

namespace {

nlohmann::ordered_json ts_json(Timestamp t) { return format_iso8601(t); }

} // namespace

std::string TruthManifest::to_json() const {
  nlohmann::ordered_json j;
  auto& jd = j["defects"] = nlohmann::ordered_json::array();
  for (const auto& r : defects) {
    nlohmann::ordered_json e;
    e["kind"] = r.kind;
    e["target"] = r.target;
    if (r.start) e["start"] = ts_json(*r.start);
    if (r.end) e["end"] = ts_json(*r.end);
    if (!r.params.empty()) e["params"] = r.params;
    if (!r.times.empty()) {
      auto& tt = e["times"] = nlohmann::ordered_json::array();
      for (const auto& t : r.times) tt.push_back(ts_json(t));
    }
    if (!r.affected.empty()) e["affected"] = r.affected;
    jd.push_back(std::move(e));
  }
  auto& jm = j["mode_truth"] = nlohmann::ordered_json::object();
  for (const auto& [tag, modes] : mode_truth) {
    auto& arr = jm[tag] = nlohmann::ordered_json::array();
    for (const auto& m : modes) {
      nlohmann::ordered_json e;
      e["start"] = ts_json(m.start);
      e["end"] = ts_json(m.end);
      e["mode"] = m.mode;
      arr.push_back(std::move(e));
    }
  }
  auto& jl = j["lab_truth"] = nlohmann::ordered_json::object();
  for (const auto& [tag, events] : lab_truth) {
    auto& arr = jl[tag] = nlohmann::ordered_json::array();
    for (const auto& ev : events) {
      nlohmann::ordered_json e;
      e["t_i"] = ts_json(ev.t_i);
      e["t_j"] = ts_json(ev.t_j);
      e["value"] = ev.value;
      e["accepted"] = ev.accepted;
      arr.push_back(std::move(e));
    }
  }
  auto& js = j["dead_steps"] = nlohmann::ordered_json::object();
  for (const auto& [tag, steps] : dead_steps) js[tag] = steps;
  auto& jc = j["clock_skew_us"] = nlohmann::ordered_json::object();
  for (const auto& [source, off] : clock_skew) jc[source] = off.us;
  auto& jt = j["loop_mode_truth"] = nlohmann::ordered_json::object();
  for (const auto& [tag, timeline] : loop_mode_truth) {
    auto& arr = jt[tag] = nlohmann::ordered_json::array();
    for (const auto& [t, code] : timeline) {
      nlohmann::ordered_json e;
      e["time"] = ts_json(t);
      e["code"] = code;
      arr.push_back(std::move(e));
    }
  }
  return j.dump(2) + "\n";
}

TruthManifest TruthManifest::from_json(const std::string& text) {
  const auto j = nlohmann::ordered_json::parse(text);
  TruthManifest m;
  for (const auto& e : j.value("defects", nlohmann::ordered_json::array())) {
    DefectRecord r;
    r.kind = e.at("kind").get<std::string>();
    r.target = e.at("target").get<std::string>();
    if (e.contains("start")) r.start = parse_iso8601(e["start"].get<std::string>());
    if (e.contains("end")) r.end = parse_iso8601(e["end"].get<std::string>());
    if (e.contains("params"))
      r.params = e["params"].get<std::map<std::string, double>>();
    if (e.contains("times"))
      for (const auto& t : e["times"]) r.times.push_back(parse_iso8601(t.get<std::string>()));
    if (e.contains("affected")) r.affected = e["affected"].get<std::vector<TagId>>();
    m.defects.push_back(std::move(r));
  }
  if (j.contains("mode_truth")) {
    for (const auto& [tag, arr] : j["mode_truth"].items()) {
      for (const auto& e : arr) {
        m.mode_truth[tag].push_back({parse_iso8601(e.at("start").get<std::string>()),
                                     parse_iso8601(e.at("end").get<std::string>()),
                                     e.at("mode").get<int>()});
      }
    }
  }
  if (j.contains("lab_truth")) {
    for (const auto& [tag, arr] : j["lab_truth"].items()) {
      for (const auto& e : arr) {
        m.lab_truth[tag].push_back({parse_iso8601(e.at("t_i").get<std::string>()),
                                    parse_iso8601(e.at("t_j").get<std::string>()),
                                    e.at("value").get<double>(),
                                    e.at("accepted").get<bool>()});
      }
    }
  }
  if (j.contains("dead_steps"))
    for (const auto& [tag, v] : j["dead_steps"].items()) m.dead_steps[tag] = v.get<int>();
  if (j.contains("clock_skew_us"))
    for (const auto& [src, v] : j["clock_skew_us"].items())
      m.clock_skew[src] = Duration{v.get<std::int64_t>()};
  if (j.contains("loop_mode_truth")) {
    for (const auto& [tag, arr] : j["loop_mode_truth"].items()) {
      for (const auto& e : arr)
        m.loop_mode_truth[tag].push_back(
            {parse_iso8601(e.at("time").get<std::string>()), e.at("code").get<int>()});
    }
  }
  return m;
}

} // namespace histprep::synth
