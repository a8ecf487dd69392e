#include "histprep/ingest/dataset.hpp"

#include <algorithm>

#include "histprep/core/errors.hpp"

namespace histprep::ingest {

void Dataset::validate() const {
  for (const auto& [tag, s] : series) {
    (void)s;
    if (!meta.count(tag))
      throw ValidationError("Dataset: series '" + tag + "' has no TagMeta entry");
  }
  for (const auto& [tag, m] : meta) {
    m.validate();
    if (!has_source(m.source))
      throw ValidationError("Dataset: tag '" + tag + "' references unknown source '" +
                            m.source + "'");
  }
}

bool Dataset::has_source(const std::string& name) const {
  return std::any_of(sources.begin(), sources.end(),
                     [&](const SourceId& s) { return s.name == name; });
}

void Dataset::put(RawSeries s, TagMeta m) {
  m.validate();
  if (!has_source(m.source)) sources.push_back(SourceId{m.source, std::nullopt});
  const TagId tag = s.tag();
  series.insert_or_assign(tag, std::move(s));
  meta.insert_or_assign(tag, std::move(m));
}

void merge(Dataset& into, Dataset from) {
  for (auto& [tag, s] : from.series) {
    if (into.series.count(tag))
      throw ValidationError("merge: duplicate tag '" + tag + "'");
    auto m = from.meta.find(tag);
    if (m == from.meta.end())
      throw ValidationError("merge: fragment tag '" + tag + "' has no meta");
    into.put(std::move(s), std::move(m->second));
  }
  for (const auto& src : from.sources) {
    if (!into.has_source(src.name)) into.sources.push_back(src);
  }
}

} // namespace histprep::ingest
