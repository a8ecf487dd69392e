#pragma once

#include <cstdint>
#include <vector>

#include "histprep/core/series.hpp"

namespace histprep::steady {

/// Filter factors for the variance-ratio steady-state statistic. The
/// defaults are common practitioner settings; calibrate_rcrit gives a
/// principled critical value for a chosen false-alarm rate.
struct RStatParams {
  double lambda1 = 0.2; // filtered mean
  double lambda2 = 0.1; // filtered squared deviation
  double lambda3 = 0.1; // filtered squared successive difference
  double r_crit = 2.0;  // must be > 1
  int hold_count = 3;   // consecutive exceedances before Transient

  void validate() const;
};

/// Recursion state. R compares two variance estimates and sits near 1 when
/// the signal is at steady state.
struct RStatState {
  double x_prev = 0.0;
  double xf = 0.0;     // filtered mean
  double nu2 = 0.0;    // filtered squared deviation from the filtered mean
  double delta2 = 0.0; // filtered squared successive difference
  double R = 1.0;
  bool initialized = false;
};

/// Seed from the first sample: xf = x, nu2 = delta2 = 0, R = 1.
RStatState rstat_seed(double x);

/// One filter step:
///   nu2    <- l2*(x - xf_prev)^2 + (1-l2)*nu2
///   xf     <- l1*x + (1-l1)*xf
///   delta2 <- l3*(x - x_prev)^2 + (1-l3)*delta2
///   R       = (2-l1)*nu2 / delta2
/// A vanishing delta2 (constant signal) defines R = 1: a flat line is the
/// archetypal steady state. Non-finite x is rejected (state unchanged).
RStatState rstat_update(const RStatState& state, double x, const RStatParams& p);

/// Label the series SteadyState/Transient by running the recursion across
/// it. A slot is Transient iff R exceeded r_crit on hold_count consecutive
/// updates (hysteresis against single-sample flicker). Absent slots freeze
/// the state and inherit the current label. Output tiles the series span.
std::vector<Segment> segment_steady(const GriddedSeries& s, const RStatParams& p);

/// Monte Carlo calibration of r_crit under the i.i.d. Gaussian null: returns
/// the (1 - alpha) quantile of the stationary R distribution. Deterministic
/// given the seed. n_mc >= 1000 samples collected after burn-in.
double calibrate_rcrit(const RStatParams& p, double alpha, std::size_t n_mc,
                       std::uint64_t seed);

/// SteadyState stretches common to all key tags (intersection), longer than
/// min_length, shrunk by margin at both ends so transitions survive for
/// dynamic modelling. The returned segments are the ones to drop. All tags
/// must share one grid.
std::vector<Segment> trim_unexcited(const std::vector<GriddedSeries>& key_tags,
                                    const RStatParams& p, Duration margin,
                                    Duration min_length);

} // namespace histprep::steady
