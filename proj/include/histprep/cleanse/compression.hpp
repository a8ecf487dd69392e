#pragma once

#include "histprep/core/series.hpp"

namespace histprep::cleanse {

struct CompressionParams {
  /// Chord tolerance: |value - chord| <= rel * |value| + abs. Tight enough
  /// to catch exact reconstruction of interpolated archives without
  /// flagging genuinely near-linear physics.
  double chord_rel_tol = 1e-9;
  double chord_abs_tol = 1e-12;
  double ratio_threshold = 3.0;    // archival_ratio above this -> suspected
  double linear_threshold = 0.8;   // linear_fraction above this -> suspected
};

struct CompressionFinding {
  double archival_ratio = 0.0;  // mean inter-sample interval / nominal scan
  double linear_fraction = 0.0; // interior samples on their neighbours' chord
  bool suspected = false;
};

/// Heuristics for archives that went through compression: sparse archival
/// relative to the nominal scan rate, or long exactly-linear stretches left
/// by interpolated retrieval. A pure straight-line signal yields
/// linear_fraction 1.0 (documented false-positive mode). Requires >= 50
/// samples.
CompressionFinding detect_compression(const RawSeries& raw, Duration nominal_scan,
                                      const CompressionParams& params = {});

} // namespace histprep::cleanse
