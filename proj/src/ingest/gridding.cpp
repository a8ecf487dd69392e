#include "histprep/ingest/gridding.hpp"

#include <algorithm>
#include <vector>

#include "histprep/core/errors.hpp"

namespace histprep::ingest {

ResolutionEstimate detect_resolution(const RawSeries& s) {
  if (s.size() < 2)
    throw NotEnoughData("detect_resolution: need at least 2 samples, have " +
                        std::to_string(s.size()));
  std::vector<std::int64_t> diffs;
  diffs.reserve(s.size() - 1);
  ResolutionEstimate est;
  for (size_t i = 1; i < s.size(); ++i) {
    const std::int64_t d = (s[i].t - s[i - 1].t).us;
    diffs.push_back(d);
    ++est.histogram[d];
  }
  std::sort(diffs.begin(), diffs.end());
  est.dominant = Duration{diffs[(diffs.size() - 1) / 2]};
  return est;
}

GriddedSeries grid(const RawSeries& s, const GridSpec& spec) {
  if (spec.interval.us <= 0) throw ValidationError("grid: interval must be positive");
  if (spec.max_gap < spec.interval)
    throw ValidationError("grid: max_gap must be >= interval");
  if (s.empty()) throw NotEnoughData("grid: empty series '" + s.tag() + "'");

  const Timestamp last_t = s.back().t;
  const Timestamp end = spec.end.value_or(last_t);
  std::int64_t n = 1;
  if (end > spec.start) n = (end - spec.start) / spec.interval + 1;
  if (n < 1) n = 1;

  const auto samples = s.samples();
  std::vector<std::optional<double>> out(static_cast<size_t>(n));

  // `left` tracks the last sample at or before the grid time.
  size_t left = 0;
  bool have_left = false;

  for (std::int64_t k = 0; k < n; ++k) {
    const Timestamp t = spec.start + spec.interval * k;
    while (left + 1 < samples.size() && samples[left + 1].t <= t) ++left;
    have_left = !samples.empty() && samples[left].t <= t;

    if (have_left && samples[left].t == t && samples[left].quality == Quality::Good &&
        samples[left].value) {
      out[static_cast<size_t>(k)] = samples[left].value;
      continue;
    }

    // A non-Good sample between the candidate anchor and t breaks the hold,
    // so only the most recent sample can anchor.
    const bool left_usable = have_left && samples[left].quality == Quality::Good &&
                             samples[left].value && (t - samples[left].t) <= spec.max_gap;

    if (spec.method == GridMethod::ZeroOrderHold) {
      if (left_usable) out[static_cast<size_t>(k)] = samples[left].value;
      continue;
    }

    // Linear
    const size_t right = have_left ? left + 1 : 0;
    const bool right_exists = right < samples.size();
    if (!right_exists) {
      // series tail: ZOH fallback
      if (left_usable) out[static_cast<size_t>(k)] = samples[left].value;
      continue;
    }
    const bool right_usable = samples[right].quality == Quality::Good &&
                              samples[right].value &&
                              (samples[right].t - t) <= spec.max_gap;
    if (left_usable && right_usable) {
      const double t0 = static_cast<double>(samples[left].t.us);
      const double t1 = static_cast<double>(samples[right].t.us);
      const double v0 = *samples[left].value;
      const double v1 = *samples[right].value;
      const double frac = (static_cast<double>(t.us) - t0) / (t1 - t0);
      out[static_cast<size_t>(k)] = v0 + frac * (v1 - v0);
    }
  }

  return GriddedSeries(s.tag(), spec.start, spec.interval, std::move(out), spec.method);
}

RawSeries to_raw(const GriddedSeries& s) {
  std::vector<RawSample> samples;
  samples.reserve(s.size());
  for (size_t k = 0; k < s.size(); ++k) {
    if (s[k])
      samples.push_back({s.time_at(k), s[k], Quality::Good});
    else
      samples.push_back({s.time_at(k), std::nullopt, Quality::Bad});
  }
  return RawSeries(s.tag(), std::move(samples));
}

} // namespace histprep::ingest
