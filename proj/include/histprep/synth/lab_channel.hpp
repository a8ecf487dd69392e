#pragma once

#include <cstdint>
#include <vector>

#include "histprep/core/series.hpp"

namespace histprep::synth {

struct LabChannelParams {
  Duration result_delay_lo{hours(1)};  // uniform draw bounds for t_j - t_i
  Duration result_delay_hi{hours(4)};
  double reject_fraction = 0.0;        // probability a result is not accepted
  double meas_sigma = 0.0;             // lab measurement noise
  Duration pulse_width{seconds(30)};   // acceptance pulse length
};

struct LabEventTruth {
  Timestamp t_i;
  Timestamp t_j;
  double value = 0.0;
  bool accepted = false;
};

struct LabChannel {
  RawSeries indicator;   // 0/1 sample switch: rises at t_i, falls at t_j
  RawSeries results;     // updates to truth(t_i) + noise at t_j
  RawSeries acceptance;  // pulses at t_j for accepted events
  std::vector<LabEventTruth> truth;
};

/// Emulate the operator lab workflow over a scheduled sample plan. Schedule
/// gaps must exceed the maximum result delay plus the pulse width (cycles
/// may not overlap). Deterministic given seed.
LabChannel gen_lab_channel(const GriddedSeries& truth,
                           const std::vector<Timestamp>& schedule,
                           const LabChannelParams& params, std::uint64_t seed);

} // namespace histprep::synth
