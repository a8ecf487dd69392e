#include "histprep/ingest/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "histprep/core/errors.hpp"

namespace histprep::ingest {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (true) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool parse_value_field(std::string_view f, double& out, bool& is_nan) {
  std::string v(f);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "nan") {
    is_nan = true;
    return true;
  }
  is_nan = false;
  const char* first = f.data();
  const char* last = f.data() + f.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  if (std::isnan(v)) return "NaN";
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Dataset parse_historian_csv(std::istream& in, const SourceId& source,
                            const ParseOptions& opts, ParseReport* report) {
  ParseReport local;
  ParseReport& rep = report ? *report : local;
  rep = ParseReport{};

  std::string line;
  size_t lineno = 0;
  bool header_seen = false;
  bool has_quality_col = true;

  struct PerTag {
    std::vector<RawSample> samples;
    size_t last_line = 0;
  };
  std::map<TagId, PerTag> per_tag;

  auto note_issue = [&](size_t ln, std::string what) {
    if (rep.malformed.size() < opts.max_reported_issues)
      rep.malformed.push_back({ln, std::move(what)});
  };
  size_t malformed_count = 0;

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = strip_cr(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') continue;
    if (!header_seen) {
      const auto fields = split_fields(sv);
      if (fields.size() == 4 && fields[0] == "timestamp" && fields[1] == "tag" &&
          fields[2] == "value" && fields[3] == "quality") {
        has_quality_col = true;
      } else if (fields.size() == 3 && fields[0] == "timestamp" &&
                 fields[1] == "tag" && fields[2] == "value") {
        has_quality_col = false;
      } else {
        throw ParseError("line 1: expected header 'timestamp,tag,value[,quality]', got '" +
                         std::string(sv) + "'");
      }
      header_seen = true;
      continue;
    }

    ++rep.rows_total;
    const auto fields = split_fields(sv);
    const size_t want = has_quality_col ? 4 : 3;
    if (fields.size() != want && fields.size() != want - 1) {
      // quality may be omitted row-wise only when the header omits it;
      // otherwise the row is malformed.
      ++malformed_count;
      note_issue(lineno, "expected " + std::to_string(want) + " fields, got " +
                             std::to_string(fields.size()));
      continue;
    }

    Timestamp t;
    try {
      t = parse_iso8601(fields[0]);
    } catch (const ParseError& e) {
      ++malformed_count;
      note_issue(lineno, e.what());
      continue;
    }
    const std::string tag(fields[1]);
    if (tag.empty()) {
      ++malformed_count;
      note_issue(lineno, "empty tag");
      continue;
    }
    double value = 0.0;
    bool is_nan = false;
    if (!parse_value_field(fields[2], value, is_nan)) {
      ++malformed_count;
      note_issue(lineno, "bad value '" + std::string(fields[2]) + "'");
      continue;
    }
    Quality q = Quality::Good;
    if (fields.size() == 4) q = quality_from_string(fields[3]);

    auto& bucket = per_tag[tag];
    if (!bucket.samples.empty()) {
      const Timestamp prev = bucket.samples.back().t;
      if (t == prev)
        throw ValidationError("line " + std::to_string(lineno) + ": duplicate timestamp " +
                              format_iso8601(t) + " for tag '" + tag + "'");
      if (t < prev)
        throw ValidationError("line " + std::to_string(lineno) +
                              ": timestamp regression for tag '" + tag + "' (" +
                              format_iso8601(t) + " after " + format_iso8601(prev) + ")");
    }
    RawSample sample{t, std::nullopt, q};
    if (is_nan || !std::isfinite(value)) {
      sample.quality = Quality::Bad;
      ++rep.missing_values;
    } else {
      sample.value = value;
    }
    bucket.samples.push_back(sample);
    bucket.last_line = lineno;
    ++rep.rows_ok;
  }

  if (!header_seen && lineno > 0)
    throw ParseError("no header line found");

  if (rep.rows_total > 0) {
    const double rate =
        static_cast<double>(malformed_count) / static_cast<double>(rep.rows_total);
    if (rate > opts.max_error_rate) {
      std::ostringstream msg;
      msg << malformed_count << " of " << rep.rows_total
          << " rows malformed (rate " << rate << " > " << opts.max_error_rate << ");";
      for (const auto& iss : rep.malformed)
        msg << " line " << iss.line << ": " << iss.what << ";";
      throw ParseError(msg.str());
    }
  }

  Dataset frag;
  frag.sources.push_back(source);
  for (auto& [tag, bucket] : per_tag) {
    TagMeta meta;
    meta.tag = tag;
    meta.source = source.name;
    frag.series.emplace(tag, RawSeries(tag, std::move(bucket.samples)));
    frag.meta.emplace(tag, std::move(meta));
  }
  return frag;
}

Dataset parse_historian_csv_file(const std::string& path, const SourceId& source,
                                 const ParseOptions& opts, ParseReport* report) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open '" + path + "'");
  return parse_historian_csv(f, source, opts, report);
}

namespace {

void write_row(std::ostream& out, const RawSample& s, const TagId& tag) {
  out << format_iso8601(s.t) << ',' << tag << ',';
  if (s.value)
    out << format_double(*s.value);
  else
    out << "NaN";
  out << ',' << to_string(s.quality) << '\n';
}

} // namespace

void write_historian_csv(std::ostream& out, const RawSeries& s) {
  out << "timestamp,tag,value,quality\n";
  for (const auto& smp : s.samples()) write_row(out, smp, s.tag());
}

void write_historian_csv(std::ostream& out, const Dataset& d) {
  out << "timestamp,tag,value,quality\n";
  for (const auto& [tag, s] : d.series) {
    for (const auto& smp : s.samples()) write_row(out, smp, tag);
  }
}

void write_gridded_csv(std::ostream& out, const GriddedSeries& s) {
  out << "# start=" << format_iso8601(s.start()) << '\n';
  out << "# interval_us=" << s.interval().us << '\n';
  out << "# method=" << to_string(s.method()) << '\n';
  out << "timestamp,tag,value,quality\n";
  for (size_t k = 0; k < s.size(); ++k) {
    out << format_iso8601(s.time_at(k)) << ',' << s.tag() << ',';
    if (s[k])
      out << format_double(*s[k]) << ",good\n";
    else
      out << "NaN,bad\n";
  }
}

GriddedSeries read_gridded_csv(std::istream& in) {
  std::string line;
  std::optional<Timestamp> start;
  std::optional<Duration> interval;
  GridMethod method = GridMethod::ZeroOrderHold;
  std::vector<std::optional<double>> values;
  TagId tag;
  size_t lineno = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = strip_cr(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      std::string_view body = sv.substr(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      const size_t eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = body.substr(0, eq);
      const std::string_view val = body.substr(eq + 1);
      if (key == "start") start = parse_iso8601(val);
      else if (key == "interval_us") interval = Duration{std::stoll(std::string(val))};
      else if (key == "method") method = grid_method_from_string(val);
      continue;
    }
    if (!header_seen) {
      header_seen = true; // column header
      continue;
    }
    const auto fields = split_fields(sv);
    if (fields.size() < 3)
      throw ParseError("line " + std::to_string(lineno) + ": malformed gridded row");
    if (tag.empty()) tag = std::string(fields[1]);
    double v = 0.0;
    bool is_nan = false;
    if (!parse_value_field(fields[2], v, is_nan))
      throw ParseError("line " + std::to_string(lineno) + ": bad value");
    if (is_nan)
      values.emplace_back(std::nullopt);
    else
      values.emplace_back(v);
  }
  if (!start || !interval)
    throw ParseError("gridded csv: missing '# start=' or '# interval_us=' header");
  return GriddedSeries(tag, *start, *interval, std::move(values), method);
}

GriddedSeries read_gridded_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open '" + path + "'");
  return read_gridded_csv(f);
}

} // namespace histprep::ingest
