#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "histprep/diagnostics/findings.hpp"

namespace histprep::diag {

struct TagSummary {
  std::optional<Duration> resolution;  // detected dominant interval
  std::optional<double> coverage;      // present fraction after gridding
  std::size_t sample_count = 0;
  std::size_t outlier_count = 0;
  std::vector<Segment> segments;       // inventory, sorted by start
};

/// Consolidated data-quality report. The canonical body is a pure function
/// of its inputs: identical inputs serialize to identical bytes. Generation
/// time never enters the body; callers may prepend a stamped header line.
struct DiagnosticReport {
  std::string dataset_id;
  int schema_version = 1;
  std::vector<Finding> findings; // sorted by severity, tag, kind, message
  std::map<TagId, TagSummary> tags;
};

/// Deterministic aggregation: sorts findings (severity, then first tag, then
/// kind, then message) and each tag's segment inventory.
DiagnosticReport build_report(std::string dataset_id, std::vector<Finding> findings,
                              std::map<TagId, TagSummary> tags);

/// Canonical serialization: UTF-8 JSON, stable key order, LF line endings.
std::string serialize_report(const DiagnosticReport& report);

/// Highest severity present, or nullopt for an empty findings list.
std::optional<Severity> worst_severity(const DiagnosticReport& report);

} // namespace histprep::diag
