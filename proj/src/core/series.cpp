#include "histprep/core/series.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "histprep/core/errors.hpp"

namespace histprep {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

} // namespace

const char* to_string(Quality q) {
  switch (q) {
    case Quality::Good: return "good";
    case Quality::Bad: return "bad";
    case Quality::Questionable: return "questionable";
    case Quality::Substituted: return "substituted";
  }
  return "questionable";
}

Quality quality_from_string(std::string_view s) {
  const std::string v = lower(s);
  if (v == "good") return Quality::Good;
  if (v == "bad") return Quality::Bad;
  if (v == "questionable") return Quality::Questionable;
  if (v == "substituted") return Quality::Substituted;
  return Quality::Questionable; // unknown source codes map here
}

RawSeries::RawSeries(TagId tag, std::vector<RawSample> samples)
    : tag_(std::move(tag)), samples_(std::move(samples)) {
  for (size_t i = 0; i < samples_.size(); ++i) {
    auto& s = samples_[i];
    if (s.value && !std::isfinite(*s.value)) {
      s.value.reset();
      s.quality = Quality::Bad;
    }
    if (i > 0 && !(samples_[i - 1].t < s.t)) {
      throw ValidationError("RawSeries '" + tag_ +
                            "': timestamps not strictly increasing at index " +
                            std::to_string(i) + " (" + format_iso8601(s.t) + ")");
    }
  }
}

const char* to_string(GridMethod m) {
  return m == GridMethod::ZeroOrderHold ? "zoh" : "linear";
}

GridMethod grid_method_from_string(std::string_view s) {
  const std::string v = lower(s);
  if (v == "zoh") return GridMethod::ZeroOrderHold;
  if (v == "linear") return GridMethod::Linear;
  throw ParseError("unknown grid method '" + std::string(s) + "' (zoh|linear)");
}

GriddedSeries::GriddedSeries(TagId tag, Timestamp start, Duration interval,
                             std::vector<std::optional<double>> values,
                             GridMethod method)
    : tag_(std::move(tag)), start_(start), interval_(interval),
      values_(std::move(values)), method_(method) {
  if (interval_.us <= 0)
    throw ValidationError("GriddedSeries '" + tag_ + "': interval must be positive");
  if (values_.empty())
    throw ValidationError("GriddedSeries '" + tag_ + "': length must be >= 1");
  for (auto& v : values_) {
    if (v && !std::isfinite(*v))
      throw ValidationError("GriddedSeries '" + tag_ + "': non-finite value");
  }
}

std::optional<size_t> GriddedSeries::index_of(Timestamp t) const {
  if (t < start_ || t >= end()) return std::nullopt;
  return static_cast<size_t>((t - start_) / interval_);
}

size_t GriddedSeries::present_count() const {
  size_t n = 0;
  for (const auto& v : values_)
    if (v) ++n;
  return n;
}

GriddedSeries GriddedSeries::with_values(std::vector<std::optional<double>> values) const {
  if (values.size() != values_.size())
    throw ValidationError("with_values: length mismatch");
  return GriddedSeries(tag_, start_, interval_, std::move(values), method_);
}

GriddedSeries GriddedSeries::with_tag(TagId tag) const {
  return GriddedSeries(std::move(tag), start_, interval_, values_, method_);
}

const char* to_string(TagRole r) {
  switch (r) {
    case TagRole::MV: return "mv";
    case TagRole::CV: return "cv";
    case TagRole::DV: return "dv";
    case TagRole::LabResult: return "lab_result";
    case TagRole::LabIndicator: return "lab_indicator";
    case TagRole::LabAcceptance: return "lab_acceptance";
    case TagRole::LoopMode: return "loop_mode";
    case TagRole::Prediction: return "prediction";
    case TagRole::Flow: return "flow";
    case TagRole::Other: return "other";
  }
  return "other";
}

TagRole tag_role_from_string(std::string_view s) {
  const std::string v = lower(s);
  if (v == "mv") return TagRole::MV;
  if (v == "cv") return TagRole::CV;
  if (v == "dv") return TagRole::DV;
  if (v == "lab_result") return TagRole::LabResult;
  if (v == "lab_indicator") return TagRole::LabIndicator;
  if (v == "lab_acceptance") return TagRole::LabAcceptance;
  if (v == "loop_mode") return TagRole::LoopMode;
  if (v == "prediction") return TagRole::Prediction;
  if (v == "flow") return TagRole::Flow;
  if (v == "other") return TagRole::Other;
  throw ParseError("unknown tag role '" + std::string(s) + "'");
}

void TagMeta::validate() const {
  if (normal_range && !(normal_range->first < normal_range->second))
    throw ValidationError("TagMeta '" + tag + "': normal_range lo must be < hi");
  if (scan_interval && scan_interval->us <= 0)
    throw ValidationError("TagMeta '" + tag + "': scan_interval must be positive");
}

const char* to_string(SegmentLabel l) {
  switch (l) {
    case SegmentLabel::SteadyState: return "steady_state";
    case SegmentLabel::Transient: return "transient";
    case SegmentLabel::Shutdown: return "shutdown";
    case SegmentLabel::Anomaly: return "anomaly";
    case SegmentLabel::OpenLoop: return "open_loop";
    case SegmentLabel::ClosedLoop: return "closed_loop";
    case SegmentLabel::Static: return "static";
    case SegmentLabel::Compressed: return "compressed";
    case SegmentLabel::Mode: return "mode";
  }
  return "mode";
}

std::string segment_label_string(const Segment& s) {
  if (s.label == SegmentLabel::Mode)
    return "mode:" + std::to_string(s.mode);
  return to_string(s.label);
}

std::pair<SegmentLabel, int> segment_label_from_string(std::string_view s) {
  if (s.rfind("mode:", 0) == 0) {
    const int k = std::stoi(std::string(s.substr(5)));
    return {SegmentLabel::Mode, k};
  }
  const std::string v = lower(s);
  for (SegmentLabel l : {SegmentLabel::SteadyState, SegmentLabel::Transient,
                         SegmentLabel::Shutdown, SegmentLabel::Anomaly,
                         SegmentLabel::OpenLoop, SegmentLabel::ClosedLoop,
                         SegmentLabel::Static, SegmentLabel::Compressed}) {
    if (v == to_string(l)) return {l, 0};
  }
  throw ParseError("unknown segment label '" + std::string(s) + "'");
}

void validate_segments(std::span<const Segment> segs) {
  for (size_t i = 0; i < segs.size(); ++i) {
    if (!(segs[i].start < segs[i].end))
      throw ValidationError("segment " + std::to_string(i) + ": start must be < end");
    if (i > 0 && segs[i].start < segs[i - 1].end)
      throw ValidationError("segments overlap or are unsorted at index " +
                            std::to_string(i));
  }
}

void LabEvent::validate() const {
  if (!(sample_time < result_time))
    throw ValidationError("LabEvent: sample time must precede result time");
  if (!(sample_time + sample_offset < result_time))
    throw ValidationError("LabEvent: effective sample time (t_i + delta) must precede result time");
}

RawSeries series_slice(const RawSeries& s, Timestamp start, Timestamp end) {
  if (!(start < end)) throw ValidationError("series_slice: start must be < end");
  std::vector<RawSample> out;
  for (const auto& smp : s.samples()) {
    if (smp.t >= end) break;
    if (smp.t >= start) out.push_back(smp);
  }
  return RawSeries(s.tag(), std::move(out));
}

namespace {

bool in_any_segment(Timestamp t, std::span<const Segment> segs) {
  // segments sorted: binary search for the last segment starting at or before t
  auto it = std::upper_bound(segs.begin(), segs.end(), t,
                             [](Timestamp v, const Segment& g) { return v < g.start; });
  if (it == segs.begin()) return false;
  return std::prev(it)->contains(t);
}

} // namespace

RawSeries apply_segments(const RawSeries& s, std::span<const Segment> segs,
                         SegmentAction action) {
  validate_segments(segs);
  std::vector<RawSample> out;
  out.reserve(s.size());
  for (const auto& smp : s.samples()) {
    const bool inside = in_any_segment(smp.t, segs);
    if ((action == SegmentAction::Drop) ? !inside : inside) out.push_back(smp);
  }
  return RawSeries(s.tag(), std::move(out));
}

GriddedSeries apply_segments(const GriddedSeries& s, std::span<const Segment> segs,
                             SegmentAction action) {
  validate_segments(segs);
  std::vector<std::optional<double>> out(s.values().begin(), s.values().end());
  for (size_t k = 0; k < out.size(); ++k) {
    const bool inside = in_any_segment(s.time_at(k), segs);
    if ((action == SegmentAction::Drop) ? inside : !inside) out[k].reset();
  }
  return s.with_values(std::move(out));
}

} // namespace histprep
