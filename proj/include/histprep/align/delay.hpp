#pragma once

#include "histprep/core/series.hpp"

namespace histprep::align {

struct DelayEstimate {
  int lag = 0;                 // grid steps (y lags u by this much)
  Duration lag_duration{0};    // lag * grid interval
  double peak_corr = 0.0;      // signed correlation at the chosen lag
  bool confident = false;
};

struct DelayOptions {
  double confidence_floor = 0.5;
  /// Search negative lags too (diagnosing reversed pairs). Default searches
  /// causal lags only: the MV leads the CV.
  bool allow_negative = false;
};

/// Delay (time-to-steady-state stand-in) between an input and an output on
/// the same grid: the lag maximizing |pearson(u(t), y(t + lag))| over
/// mean-removed co-present pairs, ties toward the smaller lag. Requires
/// overlap >= 10 * max_lag; throws NotEnoughData/ValidationError.
DelayEstimate estimate_delay(const GriddedSeries& u, const GriddedSeries& y,
                             Duration max_lag, const DelayOptions& opts = {});

/// Shift values by `lag` grid steps (positive moves values later); vacated
/// slots become absent; the start timestamp is unchanged. Shifting u forward
/// by the estimated lag aligns it with y.
GriddedSeries apply_shift(const GriddedSeries& s, int lag);

} // namespace histprep::align
