#include "histprep/diagnostics/report.hpp"

#include <algorithm>
#include <tuple>

#include <json.hpp>

namespace histprep::diag {

namespace {

int severity_rank(Severity s) {
  switch (s) {
    case Severity::Error: return 0;
    case Severity::Warn: return 1;
    case Severity::Info: return 2;
  }
  return 2;
}

nlohmann::ordered_json segment_json(const Segment& seg) {
  nlohmann::ordered_json j;
  j["start"] = format_iso8601(seg.start);
  j["end"] = format_iso8601(seg.end);
  j["label"] = segment_label_string(seg);
  if (seg.evidence) j["evidence"] = *seg.evidence;
  return j;
}

} // namespace

DiagnosticReport build_report(std::string dataset_id, std::vector<Finding> findings,
                              std::map<TagId, TagSummary> tags) {
  DiagnosticReport rep;
  rep.dataset_id = std::move(dataset_id);
  rep.findings = std::move(findings);
  rep.tags = std::move(tags);

  auto key = [](const Finding& f) {
    return std::make_tuple(severity_rank(f.severity),
                           f.tags.empty() ? std::string() : f.tags.front(),
                           std::string(to_string(f.kind)), f.message);
  };
  std::stable_sort(rep.findings.begin(), rep.findings.end(),
                   [&](const Finding& a, const Finding& b) { return key(a) < key(b); });
  for (auto& [tag, sum] : rep.tags) {
    (void)tag;
    std::stable_sort(sum.segments.begin(), sum.segments.end(),
                     [](const Segment& a, const Segment& b) {
                       return std::make_tuple(a.start, a.end, segment_label_string(a)) <
                              std::make_tuple(b.start, b.end, segment_label_string(b));
                     });
  }
  return rep;
}

std::string serialize_report(const DiagnosticReport& report) {
  nlohmann::ordered_json j;
  j["report_schema_version"] = report.schema_version;
  j["dataset_id"] = report.dataset_id;

  auto& jf = j["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : report.findings) {
    nlohmann::ordered_json e;
    e["severity"] = to_string(f.severity);
    e["kind"] = to_string(f.kind);
    e["tags"] = f.tags;
    nlohmann::ordered_json ev;
    for (const auto& [k, v] : f.evidence) ev[k] = v;
    e["evidence"] = std::move(ev);
    if (!f.segments.empty()) {
      auto& js = e["segments"] = nlohmann::ordered_json::array();
      for (const auto& seg : f.segments) js.push_back(segment_json(seg));
    }
    e["message"] = f.message;
    jf.push_back(std::move(e));
  }

  auto& jt = j["tags"] = nlohmann::ordered_json::object();
  for (const auto& [tag, sum] : report.tags) {
    nlohmann::ordered_json e;
    if (sum.resolution) e["resolution_us"] = sum.resolution->us;
    if (sum.coverage) e["coverage"] = *sum.coverage;
    e["sample_count"] = sum.sample_count;
    e["outlier_count"] = sum.outlier_count;
    std::map<std::string, std::size_t> counts;
    for (const auto& seg : sum.segments) ++counts[segment_label_string(seg)];
    nlohmann::ordered_json jc;
    for (const auto& [label, count] : counts) jc[label] = count;
    e["segment_counts"] = std::move(jc);
    auto& js = e["segments"] = nlohmann::ordered_json::array();
    for (const auto& seg : sum.segments) js.push_back(segment_json(seg));
    jt[tag] = std::move(e);
  }

  return j.dump(2) + "\n";
}

std::optional<Severity> worst_severity(const DiagnosticReport& report) {
  std::optional<Severity> worst;
  for (const auto& f : report.findings) {
    if (!worst || severity_rank(f.severity) < severity_rank(*worst))
      worst = f.severity;
  }
  return worst;
}

} // namespace histprep::diag
