#pragma once

#include <vector>

#include "histprep/core/series.hpp"

namespace histprep::cleanse {

/// Assign each present value a mode k = number of thresholds strictly below
/// it, merge consecutive equal-mode samples into maximal segments, then
/// debounce: segments shorter than min_mode_duration are merged into the
/// longer neighbour (ties toward the earlier segment). Thresholds must be
/// strictly ascending; empty list yields a single Mode 0 segment. The output
/// tiles the series span.
std::vector<Segment> partition_modes(const GriddedSeries& s,
                                     const std::vector<double>& thresholds,
                                     Duration min_mode_duration = Duration{0});

struct ShutdownResult {
  std::vector<Segment> shutdowns;
  std::vector<Segment> anomalies;
};

/// Maximal runs of present values below `threshold`: runs lasting at least
/// min_duration are Shutdown, shorter ones are kept as Anomaly (short dips
/// can indicate process upsets and must not be silently dropped the way a
/// blanket value filter would). Absent values inside a run extend it.
ShutdownResult detect_shutdown(const GriddedSeries& s, double threshold,
                               Duration min_duration);

/// Maximal runs (>= 2 present samples) where max - min <= noise_band and the
/// run lasts at least min_duration, labelled Static. Greedy leftmost-maximal
/// expansion keeps segments non-overlapping. Absent values break runs.
std::vector<Segment> detect_static(const GriddedSeries& s, double noise_band,
                                   Duration min_duration);

} // namespace histprep::cleanse
