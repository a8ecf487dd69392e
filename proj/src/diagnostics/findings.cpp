#include "histprep/diagnostics/findings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "histprep/core/errors.hpp"
#include "histprep/core/stats.hpp"
#include "histprep/ingest/csv.hpp"

namespace histprep::diag {

const char* to_string(FindingKind k) {
  switch (k) {
    case FindingKind::Collinear: return "collinear";
    case FindingKind::BalanceGap: return "balance_gap";
    case FindingKind::StaticTag: return "static_tag";
    case FindingKind::CompressionSuspected: return "compression_suspected";
    case FindingKind::SignFlip: return "sign_flip";
    case FindingKind::StaleBias: return "stale_bias";
    case FindingKind::ResolutionMismatch: return "resolution_mismatch";
  }
  return "static_tag";
}

const char* to_string(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warn: return "warn";
    case Severity::Info: return "info";
  }
  return "info";
}

namespace {

void require_common_grid(const std::vector<GriddedSeries>& tags, const char* who) {
  if (tags.empty()) throw ValidationError(std::string(who) + ": no tags given");
  const auto& first = tags.front();
  for (const auto& g : tags) {
    if (g.start() != first.start() || g.interval() != first.interval() ||
        g.size() != first.size())
      throw ValidationError(std::string(who) + ": tags on mismatched grids ('" +
                            first.tag() + "' vs '" + g.tag() + "')");
  }
}

// Ordinary least squares of y on X (with intercept) via normal equations
// with partial pivoting. Returns R^2, or nullopt when singular.
std::optional<double> ols_r2(const std::vector<std::vector<double>>& X,
                             const std::vector<double>& y) {
  const size_t n = y.size();
  const size_t p = X.size() + 1; // plus intercept
  std::vector<std::vector<double>> A(p, std::vector<double>(p, 0.0));
  std::vector<double> bvec(p, 0.0);

  auto col = [&](size_t j, size_t row) -> double {
    return j == 0 ? 1.0 : X[j - 1][row];
  };
  for (size_t i = 0; i < p; ++i) {
    for (size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (size_t r = 0; r < n; ++r) s += col(i, r) * col(j, r);
      A[i][j] = s;
    }
    double s = 0.0;
    for (size_t r = 0; r < n; ++r) s += col(i, r) * y[r];
    bvec[i] = s;
  }

  // Gaussian elimination with partial pivoting.
  const double pivot_floor = 1e-10 * (A[0][0] > 0 ? A[0][0] : 1.0);
  for (size_t k = 0; k < p; ++k) {
    size_t piv = k;
    for (size_t i = k + 1; i < p; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    if (std::abs(A[piv][k]) < pivot_floor) return std::nullopt; // singular
    std::swap(A[k], A[piv]);
    std::swap(bvec[k], bvec[piv]);
    for (size_t i = k + 1; i < p; ++i) {
      const double f = A[i][k] / A[k][k];
      for (size_t j = k; j < p; ++j) A[i][j] -= f * A[k][j];
      bvec[i] -= f * bvec[k];
    }
  }
  std::vector<double> beta(p, 0.0);
  for (size_t k = p; k-- > 0;) {
    double s = bvec[k];
    for (size_t j = k + 1; j < p; ++j) s -= A[k][j] * beta[j];
    beta[k] = s / A[k][k];
  }

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double sst = 0.0, ssr = 0.0;
  for (size_t r = 0; r < n; ++r) {
    double fit = beta[0];
    for (size_t j = 1; j < p; ++j) fit += beta[j] * X[j - 1][r];
    const double e = y[r] - fit;
    ssr += e * e;
    const double d = y[r] - mean;
    sst += d * d;
  }
  if (sst <= 0.0) return std::nullopt; // zero-variance response
  double r2 = 1.0 - ssr / sst;
  if (r2 < 0.0) r2 = 0.0;
  if (r2 > 1.0) r2 = 1.0;
  return r2;
}

} // namespace

std::vector<Finding> flag_collinear(const std::vector<GriddedSeries>& tags,
                                    double rho_threshold, double vif_threshold) {
  require_common_grid(tags, "flag_collinear");
  const size_t n = tags.front().size();

  // listwise deletion: rows where every tag is present
  std::vector<size_t> rows;
  for (size_t r = 0; r < n; ++r) {
    bool all = true;
    for (const auto& g : tags)
      if (!g[r]) {
        all = false;
        break;
      }
    if (all) rows.push_back(r);
  }
  if (rows.size() < 30)
    throw NotEnoughData("flag_collinear: " + std::to_string(rows.size()) +
                        " co-present rows < 30");

  std::vector<Finding> findings;

  // pairwise correlation
  for (size_t i = 0; i < tags.size(); ++i) {
    for (size_t j = i + 1; j < tags.size(); ++j) {
      const auto rho = stats::pearson(tags[i].values(), tags[j].values());
      if (rho && std::abs(*rho) > rho_threshold) {
        Finding f;
        f.tags = {tags[i].tag(), tags[j].tag()};
        f.kind = FindingKind::Collinear;
        f.severity = Severity::Warn;
        f.evidence.push_back({"pearson_rho", *rho});
        f.message = "tags '" + tags[i].tag() + "' and '" + tags[j].tag() +
                    "' are collinear (|rho| = " +
                    ingest::format_double(std::abs(*rho)) + " > " +
                    ingest::format_double(rho_threshold) +
                    "); it is unlikely both are needed";
        findings.push_back(std::move(f));
      }
    }
  }

  // per-tag VIF (needs at least two tags)
  if (tags.size() >= 2) {
    for (size_t j = 0; j < tags.size(); ++j) {
      std::vector<double> y;
      y.reserve(rows.size());
      std::vector<std::vector<double>> X(tags.size() - 1,
                                         std::vector<double>());
      for (const size_t r : rows) {
        y.push_back(*tags[j][r]);
        size_t c = 0;
        for (size_t i = 0; i < tags.size(); ++i) {
          if (i == j) continue;
          X[c++].push_back(*tags[i][r]);
        }
      }
      const auto r2 = ols_r2(X, y);
      double vif;
      if (!r2)
        vif = std::numeric_limits<double>::infinity(); // singular/degenerate
      else if (*r2 >= 1.0)
        vif = std::numeric_limits<double>::infinity();
      else
        vif = 1.0 / (1.0 - *r2);
      if (vif > vif_threshold) {
        Finding f;
        f.tags = {tags[j].tag()};
        f.kind = FindingKind::Collinear;
        f.severity = Severity::Warn;
        f.evidence.push_back({"vif", vif});
        std::ostringstream msg;
        msg << "tag '" << tags[j].tag() << "' has variance inflation factor ";
        if (std::isinf(vif)) msg << "inf (singular regression)";
        else msg << ingest::format_double(vif);
        msg << " > " << ingest::format_double(vif_threshold);
        f.message = msg.str();
        findings.push_back(std::move(f));
      }
    }
  }
  return findings;
}

BalanceResult balance_closure(const std::vector<GriddedSeries>& in_flows,
                              const std::vector<GriddedSeries>& out_flows,
                              Duration window, double tolerance_frac, double eps) {
  std::vector<GriddedSeries> all = in_flows;
  all.insert(all.end(), out_flows.begin(), out_flows.end());
  require_common_grid(all, "balance_closure");
  if (in_flows.empty() || out_flows.empty())
    throw ValidationError("balance_closure: need at least one in and one out flow");
  if (window < all.front().interval())
    throw ValidationError("balance_closure: window must be >= grid interval");

  const auto& ref = in_flows.front();
  const size_t n = ref.size();
  const size_t steps_per_window =
      static_cast<size_t>(window / ref.interval());
  const size_t n_windows = (n + steps_per_window - 1) / steps_per_window;

  std::vector<std::optional<double>> imbalance(n_windows);
  BalanceResult res;

  for (size_t w = 0; w < n_windows; ++w) {
    const size_t lo = w * steps_per_window;
    const size_t hi = std::min(n, lo + steps_per_window);
    double sum_in = 0.0, sum_out = 0.0;
    size_t rows = 0;
    for (size_t r = lo; r < hi; ++r) {
      bool all_present = true;
      for (const auto& g : all)
        if (!g[r]) {
          all_present = false;
          break;
        }
      if (!all_present) continue;
      ++rows;
      for (const auto& g : in_flows) sum_in += *g[r];
      for (const auto& g : out_flows) sum_out += *g[r];
    }
    if (rows == 0 || sum_in < eps) {
      ++res.indeterminate_windows; // e.g. shutdown: do not divide, do not flag
      continue;
    }
    const double imb = (sum_in - sum_out) / std::max(sum_in, eps);
    imbalance[w] = imb;
    if (std::abs(imb) > tolerance_frac) {
      Finding f;
      for (const auto& g : in_flows) f.tags.push_back(g.tag());
      for (const auto& g : out_flows) f.tags.push_back(g.tag());
      f.kind = FindingKind::BalanceGap;
      f.severity = Severity::Warn;
      f.evidence.push_back({"imbalance", imb});
      Segment seg;
      seg.start = ref.time_at(lo);
      seg.end = ref.time_at(hi);
      seg.label = SegmentLabel::Anomaly;
      seg.evidence = imb;
      f.segments.push_back(seg);
      f.message = "balance gap " + ingest::format_double(imb) + " over window starting " +
                  format_iso8601(ref.time_at(lo)) + " exceeds tolerance " +
                  ingest::format_double(tolerance_frac);
      res.findings.push_back(std::move(f));
    }
  }
  res.imbalance = GriddedSeries("balance_imbalance", ref.start(),
                                Duration{ref.interval().us *
                                         static_cast<std::int64_t>(steps_per_window)},
                                std::move(imbalance), GridMethod::ZeroOrderHold);
  return res;
}

std::vector<Segment> segment_loop_mode(const RawSeries& mode_tag,
                                       const std::map<std::int64_t, LoopMode>& mode_map) {
  std::vector<Segment> out;
  std::optional<LoopMode> current;
  std::optional<Timestamp> seg_start;
  Timestamp last_t{};
  Duration res{1000000};
  if (mode_tag.size() >= 2) {
    // final segment extends one typical step past the last sample
    std::vector<std::int64_t> diffs;
    for (size_t i = 1; i < mode_tag.size(); ++i)
      diffs.push_back((mode_tag[i].t - mode_tag[i - 1].t).us);
    std::sort(diffs.begin(), diffs.end());
    res = Duration{diffs[(diffs.size() - 1) / 2]};
  }

  for (const auto& smp : mode_tag.samples()) {
    if (!smp.value) continue;
    const double v = *smp.value;
    const std::int64_t code = std::llround(v);
    if (std::abs(v - static_cast<double>(code)) > 1e-6)
      throw ValidationError("segment_loop_mode: non-integer mode value " +
                            ingest::format_double(v) + " at " + format_iso8601(smp.t));
    const auto it = mode_map.find(code);
    if (it == mode_map.end())
      throw ValidationError("segment_loop_mode: unmapped mode value " +
                            std::to_string(code) + " at " + format_iso8601(smp.t));
    const LoopMode m = it->second;
    if (!current) {
      current = m;
      seg_start = smp.t;
    } else if (*current != m) {
      Segment seg;
      seg.start = *seg_start;
      seg.end = smp.t;
      seg.label = *current == LoopMode::OpenLoop ? SegmentLabel::OpenLoop
                                                 : SegmentLabel::ClosedLoop;
      out.push_back(seg);
      current = m;
      seg_start = smp.t;
    }
    last_t = smp.t;
  }
  if (current) {
    Segment seg;
    seg.start = *seg_start;
    seg.end = last_t + res;
    seg.label = *current == LoopMode::OpenLoop ? SegmentLabel::OpenLoop
                                               : SegmentLabel::ClosedLoop;
    out.push_back(seg);
  }
  return out;
}

std::vector<Finding> closed_loop_sign_check(const GriddedSeries& mv,
                                            const GriddedSeries& cv,
                                            std::span<const Segment> segments,
                                            int expected_open_loop_sign,
                                            const SignCheckOptions& opts) {
  if (expected_open_loop_sign != 1 && expected_open_loop_sign != -1)
    throw ValidationError("closed_loop_sign_check: expected sign must be +1 or -1");
  require_common_grid({mv, cv}, "closed_loop_sign_check");
  validate_segments(segments);

  // pool co-present pairs per segment class; degenerate segments skipped
  std::vector<double> open_mv, open_cv, closed_mv, closed_cv;
  std::vector<std::string> notes;
  for (const auto& seg : segments) {
    if (seg.label != SegmentLabel::OpenLoop && seg.label != SegmentLabel::ClosedLoop)
      continue;
    std::vector<double> xs, ys;
    for (size_t k = 0; k < mv.size(); ++k) {
      const Timestamp t = mv.time_at(k);
      if (!seg.contains(t)) continue;
      if (mv[k] && cv[k]) {
        xs.push_back(*mv[k]);
        ys.push_back(*cv[k]);
      }
    }
    if (xs.size() < opts.min_pairs) {
      notes.push_back("segment starting " + format_iso8601(seg.start) +
                      " skipped: only " + std::to_string(xs.size()) + " pairs");
      continue;
    }
    const auto sx = stats::mean_std(std::span<const double>(xs));
    if (sx.stddev == 0.0) {
      notes.push_back("segment starting " + format_iso8601(seg.start) +
                      " skipped: zero-variance mv");
      continue;
    }
    if (opts.differenced) {
      for (size_t i = xs.size(); i-- > 1;) {
        xs[i] -= xs[i - 1];
        ys[i] -= ys[i - 1];
      }
      xs.erase(xs.begin());
      ys.erase(ys.begin());
    }
    auto& dst_x = seg.label == SegmentLabel::OpenLoop ? open_mv : closed_mv;
    auto& dst_y = seg.label == SegmentLabel::OpenLoop ? open_cv : closed_cv;
    dst_x.insert(dst_x.end(), xs.begin(), xs.end());
    dst_y.insert(dst_y.end(), ys.begin(), ys.end());
  }

  auto pooled_rho = [](const std::vector<double>& xs,
                       const std::vector<double>& ys) -> std::optional<double> {
    if (xs.size() < 2) return std::nullopt;
    std::vector<std::optional<double>> ox(xs.begin(), xs.end());
    std::vector<std::optional<double>> oy(ys.begin(), ys.end());
    return stats::pearson(ox, oy);
  };
  const auto rho_open = pooled_rho(open_mv, open_cv);
  const auto rho_closed = pooled_rho(closed_mv, closed_cv);

  std::vector<Finding> findings;
  if (rho_closed) {
    const int closed_sign = *rho_closed > 0 ? 1 : (*rho_closed < 0 ? -1 : 0);
    const bool contradicts = closed_sign != 0 && closed_sign != expected_open_loop_sign;
    const bool open_agrees =
        !rho_open || (*rho_open > 0 ? 1 : -1) == expected_open_loop_sign;
    if (contradicts && open_agrees) {
      Finding f;
      f.tags = {mv.tag(), cv.tag()};
      f.kind = FindingKind::SignFlip;
      f.severity = Severity::Warn;
      f.evidence.push_back({"closed_loop_rho", *rho_closed});
      if (rho_open) f.evidence.push_back({"open_loop_rho", *rho_open});
      f.evidence.push_back({"expected_sign", static_cast<double>(expected_open_loop_sign)});
      std::ostringstream msg;
      msg << "closed-loop correlation of '" << mv.tag() << "' vs '" << cv.tag()
          << "' is " << ingest::format_double(*rho_closed)
          << ", contradicting the expected open-loop sign "
          << (expected_open_loop_sign > 0 ? "+" : "-")
          << "; feedback is inverting the apparent relationship";
      if (!notes.empty()) {
        msg << " (";
        for (size_t i = 0; i < notes.size(); ++i) msg << (i ? "; " : "") << notes[i];
        msg << ")";
      }
      f.message = msg.str();
      findings.push_back(std::move(f));
    }
  }
  return findings;
}

} // namespace histprep::diag
