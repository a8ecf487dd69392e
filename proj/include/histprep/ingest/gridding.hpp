#pragma once

#include <map>
#include <optional>

#include "histprep/core/series.hpp"

namespace histprep::ingest {

struct ResolutionEstimate {
  Duration dominant;                        // median successive difference
  std::map<std::int64_t, size_t> histogram; // diff (us) -> count
};

/// Median of successive timestamp differences plus the full difference
/// histogram for reporting. Median rather than mode: robust to compressed
/// stretches. Throws NotEnoughData below 2 samples.
ResolutionEstimate detect_resolution(const RawSeries& s);

struct GridSpec {
  Timestamp start;
  Duration interval;
  GridMethod method = GridMethod::ZeroOrderHold;
  Duration max_gap;                 // must be >= interval
  std::optional<Timestamp> end;     // last grid slot covers end; defaults to
                                    // the last sample time
};

/// Resample onto a uniform grid.
///
/// ZOH: grid time t takes the most recent sample value if that sample is
/// Good and within max_gap; a non-Good sample (including missing markers)
/// breaks the hold. Linear: interpolates between bracketing Good samples
/// when both lie within max_gap of t and no non-Good sample intervenes,
/// falling back to ZOH past the last sample (series tail), else absent.
/// A Good sample exactly on a grid slot is always taken verbatim, which
/// makes gridding idempotent on already-gridded data.
GriddedSeries grid(const RawSeries& s, const GridSpec& spec);

/// View a gridded series as a raw archive: one sample per slot, absent
/// slots become Bad-quality missing markers (so re-gridding reproduces the
/// series exactly).
RawSeries to_raw(const GriddedSeries& s);

} // namespace histprep::ingest
