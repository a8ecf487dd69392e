#pragma once

#include <map>
#include <string>
#include <vector>

#include "histprep/core/series.hpp"

namespace histprep::diag {

enum class FindingKind {
  Collinear,
  BalanceGap,
  StaticTag,
  CompressionSuspected,
  SignFlip,
  StaleBias,
  ResolutionMismatch,
};

const char* to_string(FindingKind k);

enum class Severity { Error, Warn, Info }; // report sort order

const char* to_string(Severity s);

/// One diagnostic outcome: which tags, what was found, how bad, and the
/// numbers/segments backing it up.
struct Finding {
  std::vector<TagId> tags; // at least one
  FindingKind kind = FindingKind::StaticTag;
  Severity severity = Severity::Info;
  std::vector<std::pair<std::string, double>> evidence; // named scalars
  std::vector<Segment> segments;
  std::string message;
};

/// Pairwise |pearson| above rho_threshold and per-tag variance inflation
/// factors above vif_threshold (VIF_j = 1/(1 - R_j^2), R_j^2 from OLS of
/// tag j on the rest over co-present rows, listwise deletion). A singular or
/// zero-variance regression reports VIF as infinity. Tags must share one
/// grid with at least 30 co-present rows.
std::vector<Finding> flag_collinear(const std::vector<GriddedSeries>& tags,
                                    double rho_threshold = 0.95,
                                    double vif_threshold = 10.0);

struct BalanceResult {
  std::vector<Finding> findings;
  /// Per-window relative imbalance (Sum_in - Sum_out) / max(Sum_in, eps);
  /// absent where indeterminate (Sum_in below eps, e.g. shutdowns).
  GriddedSeries imbalance;
  size_t indeterminate_windows = 0;
};

/// Mass/energy balance closure per window; windows with |imbalance| above
/// tolerance_frac get a BalanceGap finding. Flows must share one grid.
BalanceResult balance_closure(const std::vector<GriddedSeries>& in_flows,
                              const std::vector<GriddedSeries>& out_flows,
                              Duration window, double tolerance_frac,
                              double eps = 1e-9);

enum class LoopMode { OpenLoop, ClosedLoop };

/// Maximal constant-mode runs of the loop-mode tag as OpenLoop/ClosedLoop
/// segments tiling the tag's span. Mode codes are matched as integers
/// (|value - round(value)| <= 1e-6); any observed value without a mapping is
/// a validation error naming the value.
std::vector<Segment> segment_loop_mode(const RawSeries& mode_tag,
                                       const std::map<std::int64_t, LoopMode>& mode_map);

struct SignCheckOptions {
  size_t min_pairs = 30;   // per analyzed segment
  bool differenced = false; // correlate first differences instead of levels
};

/// MacGregor audit: Pearson rho(mv, cv) pooled over OpenLoop and over
/// ClosedLoop segments. Emits one SignFlip (Warn) finding when the
/// closed-loop sign contradicts expected_open_loop_sign (+1/-1) while the
/// open-loop sign, if computable, agrees -- the signature of feedback
/// inverting an apparent relationship. Degenerate segments (too few pairs,
/// zero variance) are skipped and noted.
std::vector<Finding> closed_loop_sign_check(const GriddedSeries& mv,
                                            const GriddedSeries& cv,
                                            std::span<const Segment> segments,
                                            int expected_open_loop_sign,
                                            const SignCheckOptions& opts = {});

} // namespace histprep::diag
