#pragma once

#include <cstdint>

#include "histprep/core/series.hpp"

namespace histprep::synth {

/// First-order-plus-dead-time test plant.
struct FoptdParams {
  double gain = 1.0;
  Duration time_constant{60000000}; // > 0
  Duration dead_time{0};            // >= 0, rounded to grid steps
  double noise_sigma = 0.0;

  void validate() const;
};

/// Dead time in whole grid steps (round to nearest); callers record the
/// rounding in their truth manifest.
int foptd_dead_steps(const FoptdParams& p, Duration interval);

/// Exact zero-order-hold discretization driven by u:
///   y_k = a*y_{k-1} + K*(1-a)*u_{k-d} + noise,  a = exp(-interval/tau)
/// seeded at steady state for u[0]. Deterministic given seed. The input must
/// be fully present.
GriddedSeries gen_foptd(const FoptdParams& p, const GriddedSeries& u,
                        std::uint64_t seed, const TagId& out_tag = "y");

/// Random telegraph excitation alternating between lo and hi with dwell
/// times drawn from [min_hold_steps, 3*min_hold_steps] grid steps.
GriddedSeries gen_prbs(const TagId& tag, Timestamp start, Duration interval,
                       std::size_t n, double lo, double hi,
                       std::size_t min_hold_steps, std::uint64_t seed);

struct PiGains {
  double kp = 0.0;
  double ki = 0.0; // 1/s
};

struct LoopResult {
  GriddedSeries mv;
  GriddedSeries cv;
  RawSeries mode; // 1 = AUTO (closed), 0 = MAN (open), logged every slot
};

/// Velocity-form PI regulating the FOPTD plant against AR(1) output
/// disturbances (pole 0.95, stationary sigma = disturbance_sigma). Under
/// feedback the MV/CV correlation inverts relative to the plant gain sign;
/// that property is what the generator exists to exhibit. Divergence
/// (|cv| > 1e6) raises GenerationError advising a gain change.
LoopResult gen_closed_loop(const FoptdParams& plant, PiGains pi,
                           const GriddedSeries& setpoint, double disturbance_sigma,
                           std::uint64_t seed);

/// Open-loop variant: the MV is the supplied excitation (e.g. gen_prbs) and
/// the mode tag reads MAN throughout.
LoopResult gen_open_loop(const FoptdParams& plant, const GriddedSeries& mv_excitation,
                         std::uint64_t seed);

} // namespace histprep::synth
