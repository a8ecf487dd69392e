#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "histprep/core/series.hpp"

namespace histprep::ingest {

/// One data collection system (DCS, lab LIMS, vendor skid). Sources carry
/// independent clocks that may be skewed against each other.
struct SourceId {
  std::string name;
  std::optional<Duration> declared_clock_offset;
};

/// In-memory dataset: every series has a TagMeta entry and every meta source
/// appears in sources. std::map keeps tag iteration deterministic.
struct Dataset {
  std::string id;
  std::map<TagId, RawSeries> series;
  std::map<TagId, TagMeta> meta;
  std::vector<SourceId> sources;
  /// Clock corrections already applied, by source name.
  std::map<std::string, Duration> applied_clock_offsets;

  void validate() const; // throws ValidationError
  bool has_source(const std::string& name) const;

  /// Insert or replace one series plus its meta; registers the source.
  void put(RawSeries s, TagMeta m);
};

/// Merge fragment `from` into `into`; duplicate tags are an error.
void merge(Dataset& into, Dataset from);

} // namespace histprep::ingest
