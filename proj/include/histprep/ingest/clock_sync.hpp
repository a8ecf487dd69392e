#pragma once

#include "histprep/ingest/dataset.hpp"

namespace histprep::ingest {

struct ClockOffsetEstimate {
  Duration offset;          // how far b's clock runs ahead of a's
  double confidence = 0.0;  // peak normalized cross-correlation magnitude
  bool low_confidence = false;
};

struct ClockOffsetOptions {
  /// Grid interval for the correlation; zero means use the finer of the two
  /// detected resolutions.
  Duration grid_interval{0};
  double confidence_floor = 0.5;
};

/// Estimate the clock offset between two sources from a shared/redundant tag
/// pair: the lag maximizing the normalized cross-correlation of the gridded,
/// mean-removed series, restricted to |lag| <= max_offset. `offset` is how
/// much b is ahead of a; shifting b's source by -offset aligns the clocks.
/// Requires overlap >= 10 * max_offset. A peak below the confidence floor is
/// flagged low_confidence but still reported.
ClockOffsetEstimate estimate_clock_offset(const RawSeries& a, const RawSeries& b,
                                          Duration max_offset,
                                          const ClockOffsetOptions& opts = {});

/// Shift all timestamps of series belonging to `source` by `offset` and
/// record the applied correction in the dataset.
Dataset apply_clock_offset(Dataset d, const std::string& source, Duration offset);

} // namespace histprep::ingest
