#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "histprep/ingest/dataset.hpp"

namespace histprep::ingest {

struct ParseIssue {
  size_t line = 0;
  std::string what;
};

struct ParseReport {
  size_t rows_total = 0;     // data rows seen (excl. header/comments/blanks)
  size_t rows_ok = 0;
  size_t missing_values = 0; // NaN rows mapped to Bad-quality markers
  std::vector<ParseIssue> malformed;
};

struct ParseOptions {
  /// Parsing fails once malformed rows exceed this fraction of data rows.
  double max_error_rate = 0.01;
  /// Cap on individually reported issues (count is always exact).
  size_t max_reported_issues = 100;
};

/// Parse a long-form historian export: header `timestamp,tag,value,quality`
/// (quality column optional, defaults to good), ISO-8601 timestamps with
/// explicit offset, `NaN` for missing values, `#` comment lines skipped.
/// Returns a Dataset fragment with default TagMeta bound to `source`.
/// Malformed rows are reported, not dropped silently; above
/// ParseOptions::max_error_rate the whole parse fails. Duplicate or
/// regressing timestamps for a tag are validation errors naming tag and line.
Dataset parse_historian_csv(std::istream& in, const SourceId& source,
                            const ParseOptions& opts = {},
                            ParseReport* report = nullptr);

Dataset parse_historian_csv_file(const std::string& path, const SourceId& source,
                                 const ParseOptions& opts = {},
                                 ParseReport* report = nullptr);

/// Serialize one series in the same long-form contract. Missing markers are
/// written as NaN with their quality flag. Doubles use shortest round-trip
/// formatting, so parse(serialize(parse(x))) == parse(x).
void write_historian_csv(std::ostream& out, const RawSeries& s);

/// All series of a dataset, ordered by tag then time (canonical form).
void write_historian_csv(std::ostream& out, const Dataset& d);

/// Gridded form: adds `# start=`, `# interval_us=`, `# method=` header
/// comments and one row per grid slot (absent slot -> NaN,bad).
void write_gridded_csv(std::ostream& out, const GriddedSeries& s);

/// Reads back a file produced by write_gridded_csv.
GriddedSeries read_gridded_csv(std::istream& in);
GriddedSeries read_gridded_csv_file(const std::string& path);

/// Formats a double with shortest round-trip representation.
std::string format_double(double v);

} // namespace histprep::ingest
