#pragma once

#include <optional>
#include <span>
#include <vector>

namespace histprep::stats {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0; // population
  size_t n = 0;
};

/// Mean and population standard deviation over present values.
MeanStd mean_std(std::span<const std::optional<double>> xs);
MeanStd mean_std(std::span<const double> xs);

/// Pearson correlation over rows where both values are present.
/// nullopt when fewer than 2 pairs or either side has zero variance.
std::optional<double> pearson(std::span<const std::optional<double>> x,
                              std::span<const std::optional<double>> y);

/// Pearson correlation of (x[k], y[k + lag]) over co-present pairs,
/// mean-removed per lag. nullopt when degenerate.
std::optional<double> lagged_pearson(std::span<const std::optional<double>> x,
                                     std::span<const std::optional<double>> y,
                                     long lag);

/// Count of indices where both are present at the given lag.
size_t lagged_pair_count(std::span<const std::optional<double>> x,
                         std::span<const std::optional<double>> y, long lag);

} // namespace histprep::stats
