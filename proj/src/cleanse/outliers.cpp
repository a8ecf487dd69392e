#include "histprep/cleanse/outliers.hpp"

#include <cmath>

#include "histprep/core/errors.hpp"
#include "histprep/core/stats.hpp"

namespace histprep::cleanse {

void OutlierParams::validate() const {
  if (!(k > 0)) throw ValidationError("OutlierParams: k must be > 0");
  if (min_window_points < 1)
    throw ValidationError("OutlierParams: min_window_points must be >= 1");
}

GlobalOutlierResult detect_outliers_global(const GriddedSeries& s,
                                           const OutlierParams& p) {
  p.validate();
  const auto ms = stats::mean_std(s.values());
  if (ms.n < static_cast<size_t>(p.min_window_points))
    throw NotEnoughData("detect_outliers_global: " + std::to_string(ms.n) +
                        " present values < min_window_points " +
                        std::to_string(p.min_window_points));
  GlobalOutlierResult res;
  res.stats = {ms.mean, ms.stddev, ms.n};
  if (ms.stddev == 0.0) {
    res.degenerate_constant = true;
    return res;
  }
  const double limit = p.k * ms.stddev;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] && std::abs(*s[i] - ms.mean) > limit) res.indices.push_back(i);
  }
  return res;
}

std::vector<size_t> detect_outliers_moving(const GriddedSeries& s,
                                           const OutlierParams& p) {
  p.validate();
  if (!p.window)
    throw ValidationError("detect_outliers_moving: window parameter required");
  const std::int64_t w = *p.window / s.interval();
  if (w < p.min_window_points)
    throw ValidationError("detect_outliers_moving: window must cover at least "
                          "min_window_points * interval");

  std::vector<size_t> flagged;
  const auto vals = s.values();
  // Two-pass stats per window: no running-sum drift, so results do not
  // depend on how far into the series a point sits.
  for (size_t i = 0; i < vals.size(); ++i) {
    if (!vals[i]) continue;
    const size_t lo = static_cast<std::int64_t>(i) > w ? i - static_cast<size_t>(w) : 0;
    double sum = 0.0;
    std::int64_t count = 0;
    for (size_t j = lo; j < i; ++j) {
      if (vals[j]) {
        sum += *vals[j];
        ++count;
      }
    }
    if (count < p.min_window_points) continue;
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (size_t j = lo; j < i; ++j) {
      if (vals[j]) {
        const double d = *vals[j] - mean;
        ss += d * d;
      }
    }
    const double sigma = std::sqrt(ss / static_cast<double>(count));
    if (std::abs(*vals[i] - mean) > p.k * sigma) flagged.push_back(i);
  }
  return flagged;
}

} // namespace histprep::cleanse
