#include "histprep/core/stats.hpp"

#include <cmath>

namespace histprep::stats {

MeanStd mean_std(std::span<const std::optional<double>> xs) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto& x : xs) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return {};
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& x : xs) {
    if (x) {
      const double d = *x - mean;
      ss += d * d;
    }
  }
  return {mean, std::sqrt(ss / static_cast<double>(n)), n};
}

MeanStd mean_std(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  if (xs.empty()) return {};
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(xs.size())), xs.size()};
}

std::optional<double> pearson(std::span<const std::optional<double>> x,
                              std::span<const std::optional<double>> y) {
  return lagged_pearson(x, y, 0);
}

std::optional<double> lagged_pearson(std::span<const std::optional<double>> x,
                                     std::span<const std::optional<double>> y,
                                     long lag) {
  double sx = 0, sy = 0;
  size_t n = 0;
  const long nx = static_cast<long>(x.size());
  const long ny = static_cast<long>(y.size());
  for (long k = 0; k < nx; ++k) {
    const long j = k + lag;
    if (j < 0 || j >= ny) continue;
    if (x[static_cast<size_t>(k)] && y[static_cast<size_t>(j)]) {
      sx += *x[static_cast<size_t>(k)];
      sy += *y[static_cast<size_t>(j)];
      ++n;
    }
  }
  if (n < 2) return std::nullopt;
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (long k = 0; k < nx; ++k) {
    const long j = k + lag;
    if (j < 0 || j >= ny) continue;
    if (x[static_cast<size_t>(k)] && y[static_cast<size_t>(j)]) {
      const double dx = *x[static_cast<size_t>(k)] - mx;
      const double dy = *y[static_cast<size_t>(j)] - my;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

size_t lagged_pair_count(std::span<const std::optional<double>> x,
                         std::span<const std::optional<double>> y, long lag) {
  size_t n = 0;
  const long nx = static_cast<long>(x.size());
  const long ny = static_cast<long>(y.size());
  for (long k = 0; k < nx; ++k) {
    const long j = k + lag;
    if (j < 0 || j >= ny) continue;
    if (x[static_cast<size_t>(k)] && y[static_cast<size_t>(j)]) ++n;
  }
  return n;
}

} // namespace histprep::stats
