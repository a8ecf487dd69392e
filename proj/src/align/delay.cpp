#include "histprep/align/delay.hpp"

#include <cmath>
#include <cstdlib>

#include "histprep/core/errors.hpp"
#include "histprep/core/stats.hpp"

namespace histprep::align {

DelayEstimate estimate_delay(const GriddedSeries& u, const GriddedSeries& y,
                             Duration max_lag, const DelayOptions& opts) {
  if (u.interval() != y.interval() || u.start() != y.start())
    throw ValidationError("estimate_delay: series must share one grid");
  if (max_lag.us < 0) throw ValidationError("estimate_delay: max_lag must be >= 0");

  const Timestamp lo = std::max(u.start(), y.start());
  const Timestamp hi = std::min(u.end(), y.end());
  if (!(lo < hi) || (hi - lo).us < 10 * max_lag.us)
    throw NotEnoughData("estimate_delay: overlap shorter than 10 * max_lag");

  const long max_steps = static_cast<long>(max_lag / u.interval());
  const long lo_lag = opts.allow_negative ? -max_steps : 0;

  bool any_pairs = false;
  std::optional<double> best_abs;
  double best_corr = 0.0;
  long best_lag = 0;
  for (long lag = lo_lag; lag <= max_steps; ++lag) {
    if (stats::lagged_pair_count(u.values(), y.values(), lag) > 0) any_pairs = true;
    const auto c = stats::lagged_pearson(u.values(), y.values(), lag);
    if (!c) continue;
    const double a = std::abs(*c);
    if (!best_abs || a > *best_abs ||
        (a == *best_abs && std::labs(lag) < std::labs(best_lag))) {
      best_abs = a;
      best_corr = *c;
      best_lag = lag;
    }
  }
  if (!any_pairs)
    throw AllAbsent("estimate_delay: no co-present pairs");
  if (!best_abs)
    throw NotEnoughData("estimate_delay: correlation degenerate at every lag");

  DelayEstimate est;
  est.lag = static_cast<int>(best_lag);
  est.lag_duration = u.interval() * best_lag;
  est.peak_corr = best_corr;
  est.confident = *best_abs >= opts.confidence_floor;
  return est;
}

GriddedSeries apply_shift(const GriddedSeries& s, int lag) {
  if (static_cast<size_t>(std::abs(lag)) >= s.size())
    throw ValidationError("apply_shift: |lag| must be smaller than the series length");
  std::vector<std::optional<double>> out(s.size());
  const auto vals = s.values();
  for (size_t i = 0; i < out.size(); ++i) {
    const long src = static_cast<long>(i) - lag;
    if (src >= 0 && src < static_cast<long>(vals.size()))
      out[i] = vals[static_cast<size_t>(src)];
  }
  return s.with_values(std::move(out));
}

} // namespace histprep::align
