#include "histprep/ingest/clock_sync.hpp"

#include <algorithm>
#include <cmath>

#include "histprep/core/errors.hpp"
#include "histprep/core/stats.hpp"
#include "histprep/ingest/gridding.hpp"

namespace histprep::ingest {

ClockOffsetEstimate estimate_clock_offset(const RawSeries& a, const RawSeries& b,
                                          Duration max_offset,
                                          const ClockOffsetOptions& opts) {
  if (max_offset.us <= 0)
    throw ValidationError("estimate_clock_offset: max_offset must be positive");
  if (a.empty() || b.empty())
    throw NotEnoughData("estimate_clock_offset: empty series");

  const Timestamp lo = std::max(a.front().t, b.front().t);
  const Timestamp hi = std::min(a.back().t, b.back().t);
  if (!(lo < hi)) throw NotEnoughData("estimate_clock_offset: series do not overlap");
  if ((hi - lo).us < 10 * max_offset.us)
    throw NotEnoughData("estimate_clock_offset: overlap shorter than 10 * max_offset");

  Duration interval = opts.grid_interval;
  if (interval.us <= 0) {
    const Duration ra = detect_resolution(a).dominant;
    const Duration rb = detect_resolution(b).dominant;
    interval = std::min(ra, rb);
    if (interval.us <= 0) interval = Duration{1};
  }

  // Grid both over the widened overlap so every lag in range has data.
  GridSpec spec;
  spec.interval = interval;
  spec.method = GridMethod::Linear;
  spec.max_gap = interval * 4;
  spec.start = lo - max_offset;
  spec.end = hi + max_offset;
  const GriddedSeries ga = grid(a, spec);
  const GriddedSeries gb = grid(b, spec);

  const long max_lag = static_cast<long>(max_offset / interval);
  std::optional<double> best;
  long best_lag = 0;
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    // b ahead of a by offset means b[k + lag] with lag = offset/interval
    // lines up with a[k].
    const auto c = stats::lagged_pearson(ga.values(), gb.values(), lag);
    if (!c) continue;
    if (!best || *c > *best || (*c == *best && std::abs(lag) < std::abs(best_lag))) {
      best = *c;
      best_lag = lag;
    }
  }
  if (!best)
    throw NotEnoughData("estimate_clock_offset: no co-present pairs at any lag");

  ClockOffsetEstimate est;
  est.offset = interval * best_lag;
  est.confidence = std::abs(*best);
  est.low_confidence = est.confidence < opts.confidence_floor;
  return est;
}

Dataset apply_clock_offset(Dataset d, const std::string& source, Duration offset) {
  if (!d.has_source(source))
    throw ValidationError("apply_clock_offset: unknown source '" + source + "'");
  for (auto& [tag, s] : d.series) {
    const auto m = d.meta.find(tag);
    if (m == d.meta.end() || m->second.source != source) continue;
    std::vector<RawSample> shifted(s.samples().begin(), s.samples().end());
    for (auto& smp : shifted) smp.t = smp.t + offset;
    s = RawSeries(tag, std::move(shifted));
  }
  d.applied_clock_offsets[source] =
      Duration{d.applied_clock_offsets[source].us + offset.us};
  return d;
}

} // namespace histprep::ingest
