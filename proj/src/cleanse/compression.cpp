#include "histprep/cleanse/compression.hpp"

#include <cmath>

#include "histprep/core/errors.hpp"

namespace histprep::cleanse {

CompressionFinding detect_compression(const RawSeries& raw, Duration nominal_scan,
                                      const CompressionParams& params) {
  if (nominal_scan.us <= 0)
    throw ValidationError("detect_compression: nominal_scan must be positive");
  if (raw.size() < 50)
    throw NotEnoughData("detect_compression: need >= 50 samples, have " +
                        std::to_string(raw.size()));

  CompressionFinding f;
  const double span = static_cast<double>((raw.back().t - raw.front().t).us);
  const double mean_interval = span / static_cast<double>(raw.size() - 1);
  f.archival_ratio = mean_interval / static_cast<double>(nominal_scan.us);

  size_t interior = 0, on_chord = 0;
  for (size_t i = 1; i + 1 < raw.size(); ++i) {
    const auto& a = raw[i - 1];
    const auto& b = raw[i];
    const auto& c = raw[i + 1];
    if (!a.value || !b.value || !c.value) continue;
    ++interior;
    const double frac = static_cast<double>((b.t - a.t).us) /
                        static_cast<double>((c.t - a.t).us);
    const double chord = *a.value + frac * (*c.value - *a.value);
    const double tol = params.chord_rel_tol * std::abs(*b.value) + params.chord_abs_tol;
    if (std::abs(*b.value - chord) <= tol) ++on_chord;
  }
  f.linear_fraction =
      interior > 0 ? static_cast<double>(on_chord) / static_cast<double>(interior) : 0.0;

  f.suspected = f.archival_ratio > params.ratio_threshold ||
                f.linear_fraction > params.linear_threshold;
  return f;
}

} // namespace histprep::cleanse
