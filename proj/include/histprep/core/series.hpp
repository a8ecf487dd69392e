#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "histprep/core/time.hpp"

namespace histprep {

using TagId = std::string;

/// Historian sample quality. Unknown source codes map to Questionable.
enum class Quality { Good, Bad, Questionable, Substituted };

const char* to_string(Quality q);
Quality quality_from_string(std::string_view s); // case-insensitive

/// One archived sample. A missing marker is a sample whose value is absent
/// (always Bad or Questionable quality); finite values only are ever stored.
struct RawSample {
  Timestamp t;
  std::optional<double> value;
  Quality quality = Quality::Good;
};

/// Un-gridded (timestamp, value, quality) archive for one tag, as stored by
/// a historian. Timestamps strictly increasing; construction rejects
/// violations. Non-finite input values are normalized to Bad-quality missing
/// markers. Immutable after construction.
class RawSeries {
public:
  RawSeries() = default;
  RawSeries(TagId tag, std::vector<RawSample> samples);

  const TagId& tag() const { return tag_; }
  std::span<const RawSample> samples() const { return samples_; }
  size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const RawSample& operator[](size_t i) const { return samples_[i]; }
  const RawSample& front() const { return samples_.front(); }
  const RawSample& back() const { return samples_.back(); }

private:
  TagId tag_;
  std::vector<RawSample> samples_;
};

enum class GridMethod { ZeroOrderHold, Linear };

const char* to_string(GridMethod m);
GridMethod grid_method_from_string(std::string_view s);

/// Uniformly sampled series. Index k lives at start + k*interval exactly.
/// Missing values are explicit absence markers, never sentinel numbers.
class GriddedSeries {
public:
  GriddedSeries() = default;
  GriddedSeries(TagId tag, Timestamp start, Duration interval,
                std::vector<std::optional<double>> values,
                GridMethod method = GridMethod::ZeroOrderHold);

  const TagId& tag() const { return tag_; }
  Timestamp start() const { return start_; }
  Duration interval() const { return interval_; }
  GridMethod method() const { return method_; }
  std::span<const std::optional<double>> values() const { return values_; }
  size_t size() const { return values_.size(); }
  const std::optional<double>& operator[](size_t i) const { return values_[i]; }

  Timestamp time_at(size_t k) const { return start_ + interval_ * static_cast<std::int64_t>(k); }
  /// One past the last grid slot (half-open span of the series).
  Timestamp end() const { return time_at(values_.size()); }

  /// Grid index containing time t (floor), or nullopt outside [start, end).
  std::optional<size_t> index_of(Timestamp t) const;

  size_t present_count() const;

  /// Returns a copy with the given values (same tag/grid geometry).
  GriddedSeries with_values(std::vector<std::optional<double>> values) const;
  GriddedSeries with_tag(TagId tag) const;

private:
  TagId tag_;
  Timestamp start_{};
  Duration interval_{1};
  std::vector<std::optional<double>> values_;
  GridMethod method_ = GridMethod::ZeroOrderHold;
};

/// Tag roles used by alignment and diagnostics.
enum class TagRole { MV, CV, DV, LabResult, LabIndicator, LabAcceptance, LoopMode, Prediction, Flow, Other };

const char* to_string(TagRole r);
TagRole tag_role_from_string(std::string_view s);

/// A-priori knowledge about one tag (units, role, normal operating range).
struct TagMeta {
  TagId tag;
  std::string unit;
  TagRole role = TagRole::Other;
  std::optional<std::pair<double, double>> normal_range; // lo < hi
  std::string source;
  std::optional<Duration> scan_interval;

  void validate() const; // throws ValidationError
};

enum class SegmentLabel {
  SteadyState,
  Transient,
  Shutdown,
  Anomaly,
  OpenLoop,
  ClosedLoop,
  Static,
  Compressed,
  Mode, // discrete operating mode, index in Segment::mode
};

const char* to_string(SegmentLabel l);

/// Labelled half-open interval [start, end). Half-open everywhere so
/// adjacent segments compose without double counting.
struct Segment {
  Timestamp start;
  Timestamp end;
  SegmentLabel label = SegmentLabel::SteadyState;
  int mode = 0;                    // meaningful for label == Mode
  std::optional<double> evidence;  // e.g. mean R-statistic, correlation

  bool contains(Timestamp t) const { return start <= t && t < end; }
  Duration length() const { return end - start; }
};

/// Serialized label, e.g. "steady_state", "mode:2".
std::string segment_label_string(const Segment& s);
std::pair<SegmentLabel, int> segment_label_from_string(std::string_view s);

/// Throws ValidationError unless sorted by start, non-overlapping, and each
/// start < end.
void validate_segments(std::span<const Segment> segs);

/// One lab sample lifecycle. sample_offset is the configured collection-time
/// uncertainty delta; effective sample time is sample_time + sample_offset.
struct LabEvent {
  Timestamp sample_time;       // t_i: indicator rising edge
  Duration sample_offset{0};   // configured delta-t
  Timestamp result_time;       // t_j: indicator falling edge
  double value = 0.0;          // y_j
  bool accepted = false;

  void validate() const; // t_i < t_j and t_i + delta < t_j
};

// ---- operations ----

/// Samples with start <= t < end, order and quality preserved.
RawSeries series_slice(const RawSeries& s, Timestamp start, Timestamp end);

enum class SegmentAction { Drop, Keep };

/// Drop removes every sample whose timestamp falls inside any segment; Keep
/// retains only those. Segments must be sorted and non-overlapping.
RawSeries apply_segments(const RawSeries& s, std::span<const Segment> segs,
                         SegmentAction action);

/// Gridded variant: affected slots become absent (grid geometry unchanged).
GriddedSeries apply_segments(const GriddedSeries& s, std::span<const Segment> segs,
                             SegmentAction action);

} // namespace histprep
