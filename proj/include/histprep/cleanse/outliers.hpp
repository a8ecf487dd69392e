#pragma once

#include <optional>
#include <vector>

#include "histprep/core/series.hpp"

namespace histprep::cleanse {

struct OutlierParams {
  double k = 3.0;                   // sigma multiplier
  std::optional<Duration> window;   // absent -> global statistics
  int min_window_points = 8;

  void validate() const;
};

struct SeriesStats {
  double mean = 0.0;
  double stddev = 0.0; // population
  size_t n = 0;
};

struct GlobalOutlierResult {
  std::vector<size_t> indices;
  SeriesStats stats;
  /// True when sigma == 0 (constant series); no outliers by definition.
  bool degenerate_constant = false;
};

/// Flags exactly the present indices with |x - mean| > k * sigma (strict),
/// mean and population sigma computed over all present values. Absent values
/// are never flagged. Requires at least min_window_points present values.
GlobalOutlierResult detect_outliers_global(const GriddedSeries& s,
                                           const OutlierParams& p);

/// Moving-window variant: statistics are computed over the trailing window
/// [t - window, t) excluding the tested point (leave-one-out, so a spike
/// cannot mask itself). A point is only testable when its window holds at
/// least min_window_points present values. Accounts for operating-mode
/// changes that defeat the global test.
std::vector<size_t> detect_outliers_moving(const GriddedSeries& s,
                                           const OutlierParams& p);

} // namespace histprep::cleanse
