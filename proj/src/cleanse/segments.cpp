#include "histprep/cleanse/segments.hpp"

#include <algorithm>
#include <deque>

#include "histprep/core/errors.hpp"

namespace histprep::cleanse {

namespace {

struct IndexRun {
  size_t first = 0; // inclusive slot
  size_t last = 0;  // inclusive slot
  int mode = 0;
  size_t slots() const { return last - first + 1; }
};

void coalesce(std::vector<IndexRun>& runs) {
  std::vector<IndexRun> out;
  for (const auto& r : runs) {
    if (!out.empty() && out.back().mode == r.mode && out.back().last + 1 == r.first)
      out.back().last = r.last;
    else
      out.push_back(r);
  }
  runs = std::move(out);
}

} // namespace

std::vector<Segment> partition_modes(const GriddedSeries& s,
                                     const std::vector<double>& thresholds,
                                     Duration min_mode_duration) {
  for (size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i - 1] < thresholds[i]))
      throw ValidationError("partition_modes: thresholds must be strictly ascending");
  }

  const auto vals = s.values();
  // Per-slot mode; absents inherit the previous present slot's mode so the
  // segments tile the whole span.
  std::vector<int> mode(vals.size(), -1);
  int current = -1;
  for (size_t i = 0; i < vals.size(); ++i) {
    if (vals[i]) {
      const auto it = std::lower_bound(thresholds.begin(), thresholds.end(), *vals[i]);
      current = static_cast<int>(it - thresholds.begin());
    }
    mode[i] = current;
  }
  // Leading absents inherit the first present mode.
  int first_mode = -1;
  for (size_t i = 0; i < vals.size(); ++i) {
    if (mode[i] >= 0) {
      first_mode = mode[i];
      break;
    }
  }
  if (first_mode < 0) return {}; // no present values at all
  for (auto& m : mode) {
    if (m < 0) m = first_mode;
    else break;
  }

  std::vector<IndexRun> runs;
  for (size_t i = 0; i < mode.size(); ++i) {
    if (!runs.empty() && runs.back().mode == mode[i])
      runs.back().last = i;
    else
      runs.push_back({i, i, mode[i]});
  }

  // Debounce: fold sub-minimum segments into the longer neighbour,
  // shortest first, ties toward the earlier segment.
  if (min_mode_duration.us > 0) {
    const std::int64_t min_slots =
        (min_mode_duration.us + s.interval().us - 1) / s.interval().us;
    while (runs.size() > 1) {
      size_t shortest = runs.size();
      for (size_t i = 0; i < runs.size(); ++i) {
        if (static_cast<std::int64_t>(runs[i].slots()) < min_slots &&
            (shortest == runs.size() || runs[i].slots() < runs[shortest].slots()))
          shortest = i;
      }
      if (shortest == runs.size()) break;
      size_t into;
      if (shortest == 0) into = 1;
      else if (shortest + 1 == runs.size()) into = shortest - 1;
      else if (runs[shortest + 1].slots() > runs[shortest - 1].slots()) into = shortest + 1;
      else into = shortest - 1; // tie (or left longer) -> earlier segment
      if (into < shortest)
        runs[into].last = runs[shortest].last;
      else
        runs[into].first = runs[shortest].first;
      runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(shortest));
      coalesce(runs);
    }
  }

  std::vector<Segment> out;
  out.reserve(runs.size());
  for (const auto& r : runs) {
    Segment seg;
    seg.start = s.time_at(r.first);
    seg.end = s.time_at(r.last + 1);
    seg.label = SegmentLabel::Mode;
    seg.mode = r.mode;
    out.push_back(seg);
  }
  return out;
}

ShutdownResult detect_shutdown(const GriddedSeries& s, double threshold,
                               Duration min_duration) {
  if (min_duration < s.interval())
    throw ValidationError("detect_shutdown: min_duration must be >= interval");
  ShutdownResult res;
  const auto vals = s.values();
  size_t i = 0;
  while (i < vals.size()) {
    if (!vals[i] || !(*vals[i] < threshold)) {
      ++i;
      continue;
    }
    // run of sub-threshold present values; interior absents extend it
    const size_t first = i;
    size_t last = i;
    size_t j = i + 1;
    while (j < vals.size()) {
      if (!vals[j]) {
        ++j;
        continue;
      }
      if (*vals[j] < threshold) {
        last = j;
        ++j;
      } else {
        break;
      }
    }
    Segment seg;
    seg.start = s.time_at(first);
    seg.end = s.time_at(last + 1);
    const Duration dur = seg.end - seg.start;
    if (dur >= min_duration) {
      seg.label = SegmentLabel::Shutdown;
      res.shutdowns.push_back(seg);
    } else {
      seg.label = SegmentLabel::Anomaly;
      res.anomalies.push_back(seg);
    }
    i = last + 1;
  }
  return res;
}

std::vector<Segment> detect_static(const GriddedSeries& s, double noise_band,
                                   Duration min_duration) {
  if (noise_band < 0)
    throw ValidationError("detect_static: noise_band must be >= 0");
  std::vector<Segment> out;
  const auto vals = s.values();
  const size_t n = vals.size();

  // Monotonic deques over the current window [lo, j) of consecutive present
  // slots; fronts hold the window max/min indices.
  std::deque<size_t> maxq, minq;
  size_t lo = 0;
  bool in_window = false;

  auto window_range = [&]() { return *vals[maxq.front()] - *vals[minq.front()]; };

  // Close [first, last] (all present, range already known); true if emitted.
  auto emit = [&](size_t first, size_t last, double range) {
    if (last - first + 1 < 2) return false;
    Segment seg;
    seg.start = s.time_at(first);
    seg.end = s.time_at(last + 1);
    if (seg.end - seg.start < min_duration) return false;
    seg.label = SegmentLabel::Static;
    seg.evidence = range;
    out.push_back(seg);
    return true;
  };

  for (size_t j = 0; j <= n; ++j) {
    const bool present = j < n && vals[j].has_value();
    if (!present) {
      if (in_window) emit(lo, j - 1, window_range());
      maxq.clear();
      minq.clear();
      in_window = false;
      lo = j + 1;
      continue;
    }
    const double v = *vals[j];
    if (in_window) {
      const double wmax = std::max(*vals[maxq.front()], v);
      const double wmin = std::min(*vals[minq.front()], v);
      if (wmax - wmin > noise_band) {
        // adding j would violate: [lo, j-1] was maximal from lo
        if (emit(lo, j - 1, window_range())) {
          maxq.clear();
          minq.clear();
          lo = j;
        } else {
          // not emitted: slide lo minimally so longer runs starting later
          // are not skipped
          while (!maxq.empty() &&
                 std::max(*vals[maxq.front()], v) - std::min(*vals[minq.front()], v) >
                     noise_band) {
            if (maxq.front() == lo) maxq.pop_front();
            if (minq.front() == lo) minq.pop_front();
            ++lo;
          }
          if (maxq.empty()) lo = j;
        }
      }
    } else {
      lo = j;
      in_window = true;
    }
    while (!maxq.empty() && *vals[maxq.back()] <= v) maxq.pop_back();
    maxq.push_back(j);
    while (!minq.empty() && *vals[minq.back()] >= v) minq.pop_back();
    minq.push_back(j);
  }
  return out;
}

} // namespace histprep::cleanse
