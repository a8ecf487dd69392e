#include "histprep/steadystate/rstat.hpp"

#include <algorithm>
#include <cmath>

#include "histprep/core/errors.hpp"
#include "histprep/core/random.hpp"

namespace histprep::steady {

namespace {
constexpr double kDelta2Floor = 1e-30;
}

void RStatParams::validate() const {
  auto in_unit = [](double l) { return l > 0.0 && l <= 1.0; };
  if (!in_unit(lambda1) || !in_unit(lambda2) || !in_unit(lambda3))
    throw ValidationError("RStatParams: lambda factors must be in (0, 1]");
  if (!(r_crit > 1.0)) throw ValidationError("RStatParams: r_crit must be > 1");
  if (hold_count < 1) throw ValidationError("RStatParams: hold_count must be >= 1");
}

RStatState rstat_seed(double x) {
  if (!std::isfinite(x)) throw ValidationError("rstat_seed: non-finite sample");
  RStatState st;
  st.x_prev = x;
  st.xf = x;
  st.nu2 = 0.0;
  st.delta2 = 0.0;
  st.R = 1.0;
  st.initialized = true;
  return st;
}

RStatState rstat_update(const RStatState& state, double x, const RStatParams& p) {
  if (!state.initialized)
    throw ValidationError("rstat_update: state not seeded");
  if (!std::isfinite(x))
    throw ValidationError("rstat_update: non-finite sample rejected");

  RStatState st = state;
  const double dev = x - state.xf;      // against the previous filtered mean
  st.nu2 = p.lambda2 * dev * dev + (1.0 - p.lambda2) * state.nu2;
  st.xf = p.lambda1 * x + (1.0 - p.lambda1) * state.xf;
  const double diff = x - state.x_prev;
  st.delta2 = p.lambda3 * diff * diff + (1.0 - p.lambda3) * state.delta2;
  st.x_prev = x;
  st.R = st.delta2 < kDelta2Floor ? 1.0 : (2.0 - p.lambda1) * st.nu2 / st.delta2;
  return st;
}

std::vector<Segment> segment_steady(const GriddedSeries& s, const RStatParams& p) {
  p.validate();
  const auto vals = s.values();
  if (static_cast<std::int64_t>(s.present_count()) < p.hold_count)
    throw NotEnoughData("segment_steady: fewer present values than hold_count");

  std::vector<Segment> out;
  RStatState st;
  int consecutive = 0;
  SegmentLabel label = SegmentLabel::SteadyState;
  size_t seg_start = 0;
  bool have_segment = false;
  double evidence_sum = 0.0;
  size_t evidence_n = 0;

  auto close = [&](size_t end_slot) {
    if (!have_segment || end_slot == seg_start) return;
    Segment seg;
    seg.start = s.time_at(seg_start);
    seg.end = s.time_at(end_slot);
    seg.label = label;
    if (evidence_n > 0) seg.evidence = evidence_sum / static_cast<double>(evidence_n);
    out.push_back(seg);
  };

  for (size_t k = 0; k < vals.size(); ++k) {
    SegmentLabel next = label;
    if (vals[k]) {
      if (!st.initialized) {
        st = rstat_seed(*vals[k]);
      } else {
        st = rstat_update(st, *vals[k], p);
        consecutive = st.R > p.r_crit ? consecutive + 1 : 0;
      }
      next = consecutive >= p.hold_count ? SegmentLabel::Transient
                                         : SegmentLabel::SteadyState;
    } // absent: state frozen, label inherited

    if (!have_segment) {
      have_segment = true;
      seg_start = 0; // tile from the start of the series
      label = next;
    } else if (next != label) {
      close(k);
      seg_start = k;
      label = next;
      evidence_sum = 0.0;
      evidence_n = 0;
    }
    if (vals[k]) {
      evidence_sum += st.R;
      ++evidence_n;
    }
  }
  close(vals.size());
  return out;
}

double calibrate_rcrit(const RStatParams& p, double alpha, std::size_t n_mc,
                       std::uint64_t seed) {
  RStatParams q = p;
  q.r_crit = 2.0; // irrelevant here, keep validate() happy
  q.validate();
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("calibrate_rcrit: alpha must be in (0, 1)");
  if (n_mc < 1000)
    throw ValidationError("calibrate_rcrit: n_mc must be >= 1000");

  constexpr std::size_t kBurnIn = 500;
  rng::Engine eng(seed);
  RStatState st = rstat_seed(eng.normal());
  std::vector<double> rs;
  rs.reserve(n_mc);
  for (std::size_t i = 0; i < kBurnIn; ++i) st = rstat_update(st, eng.normal(), q);
  for (std::size_t i = 0; i < n_mc; ++i) {
    st = rstat_update(st, eng.normal(), q);
    rs.push_back(st.R);
  }
  std::sort(rs.begin(), rs.end());
  // empirical (1 - alpha) quantile; alpha -> 1 approaches the minimum
  const double pos = (1.0 - alpha) * static_cast<double>(rs.size() - 1);
  const std::size_t idx = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(idx);
  if (idx + 1 >= rs.size()) return rs.back();
  return rs[idx] * (1.0 - frac) + rs[idx + 1] * frac;
}

std::vector<Segment> trim_unexcited(const std::vector<GriddedSeries>& key_tags,
                                    const RStatParams& p, Duration margin,
                                    Duration min_length) {
  if (key_tags.empty())
    throw ValidationError("trim_unexcited: key_tags must be non-empty");
  const auto& first = key_tags.front();
  for (const auto& g : key_tags) {
    if (g.start() != first.start() || g.interval() != first.interval() ||
        g.size() != first.size())
      throw ValidationError("trim_unexcited: tags on mismatched grids ('" +
                            first.tag() + "' vs '" + g.tag() + "')");
  }

  // Intersect steady stretches across all key tags.
  std::vector<std::pair<Timestamp, Timestamp>> steady;
  steady.push_back({first.start(), first.end()});
  for (const auto& g : key_tags) {
    const auto segs = segment_steady(g, p);
    std::vector<std::pair<Timestamp, Timestamp>> mine;
    for (const auto& seg : segs) {
      if (seg.label == SegmentLabel::SteadyState) mine.push_back({seg.start, seg.end});
    }
    std::vector<std::pair<Timestamp, Timestamp>> next;
    for (const auto& a : steady) {
      for (const auto& b : mine) {
        const Timestamp lo = std::max(a.first, b.first);
        const Timestamp hi = std::min(a.second, b.second);
        if (lo < hi) next.push_back({lo, hi});
      }
    }
    steady = std::move(next);
  }

  std::vector<Segment> drops;
  for (const auto& [lo, hi] : steady) {
    if (hi - lo < min_length) continue;
    const Timestamp s2 = lo + margin;
    const Timestamp e2 = hi - margin;
    if (!(s2 < e2)) continue;
    Segment seg;
    seg.start = s2;
    seg.end = e2;
    seg.label = SegmentLabel::SteadyState;
    drops.push_back(seg);
  }
  std::sort(drops.begin(), drops.end(),
            [](const Segment& a, const Segment& b) { return a.start < b.start; });
  return drops;
}

} // namespace histprep::steady
