#include "histprep/align/lab.hpp"

#include <cmath>
#include <ostream>

#include "histprep/core/errors.hpp"
#include "histprep/ingest/csv.hpp"

namespace histprep::align {

namespace {

constexpr double kBinaryTol = 1e-6;

enum class Edge { Rising, Falling };

struct EdgeEvent {
  Timestamp t;
  Edge kind;
};

// Present samples interpreted as a binary signal; values outside {0,1}
// within tolerance are rejected. Quality is ignored for indicator tags:
// operators toggle them by hand and historians rarely flag them.
std::vector<EdgeEvent> binary_edges(const RawSeries& s, const char* what) {
  std::vector<EdgeEvent> edges;
  std::optional<bool> prev;
  for (const auto& smp : s.samples()) {
    if (!smp.value) continue;
    bool level;
    if (std::abs(*smp.value) <= kBinaryTol) level = false;
    else if (std::abs(*smp.value - 1.0) <= kBinaryTol) level = true;
    else
      throw ValidationError(std::string(what) + " tag '" + s.tag() + "' value " +
                            ingest::format_double(*smp.value) + " at " +
                            format_iso8601(smp.t) + " is not in {0, 1}");
    // A stream that opens high yields no rising edge: the rise happened
    // before the data started and its time must not be guessed.
    if (prev && *prev != level)
      edges.push_back({smp.t, level ? Edge::Rising : Edge::Falling});
    prev = level;
  }
  return edges;
}

} // namespace

LabParseResult parse_lab_events(const RawSeries& indicator, const RawSeries& results,
                                const RawSeries* acceptance, Duration accept_window,
                                Duration delta_t) {
  if (accept_window.us < 0)
    throw ValidationError("parse_lab_events: accept_window must be >= 0");

  LabParseResult out;
  const auto edges = binary_edges(indicator, "indicator");

  // Acceptance pulses: rising edges with a completing fall before stream end.
  std::vector<Timestamp> pulses;
  if (acceptance) {
    const auto a_edges = binary_edges(*acceptance, "acceptance");
    for (size_t i = 0; i < a_edges.size(); ++i) {
      if (a_edges[i].kind != Edge::Rising) continue;
      for (size_t j = i + 1; j < a_edges.size(); ++j) {
        if (a_edges[j].kind == Edge::Falling) {
          pulses.push_back(a_edges[i].t);
          break;
        }
      }
    }
  }

  std::optional<Timestamp> open_rise;
  for (const auto& e : edges) {
    if (e.kind == Edge::Rising) {
      if (open_rise) {
        out.warnings.push_back("rising edge at " + format_iso8601(e.t) +
                               " while a cycle from " + format_iso8601(*open_rise) +
                               " is still open; previous cycle dropped");
      }
      open_rise = e.t;
      continue;
    }
    // falling
    if (!open_rise) {
      out.warnings.push_back("falling edge at " + format_iso8601(e.t) +
                             " with no preceding rising edge; skipped");
      continue;
    }
    const Timestamp t_i = *open_rise;
    const Timestamp t_j = e.t;
    open_rise.reset();

    // latest results update inside [t_j - w, t_j + w]
    std::optional<double> y;
    for (const auto& smp : results.samples()) {
      if (smp.t > t_j + accept_window) break;
      if (smp.t < t_j - accept_window) continue;
      if (smp.value) y = smp.value;
    }
    if (!y) {
      out.warnings.push_back("cycle " + format_iso8601(t_i) + " -> " +
                             format_iso8601(t_j) +
                             ": no results value within the accept window; skipped");
      continue;
    }

    bool accepted = false;
    for (const Timestamp pt : pulses) {
      if (pt >= t_j && pt <= t_j + accept_window) {
        accepted = true;
        break;
      }
    }

    LabEvent ev;
    ev.sample_time = t_i;
    ev.sample_offset = delta_t;
    ev.result_time = t_j;
    ev.value = *y;
    ev.accepted = accepted;
    ev.validate();
    out.events.push_back(ev);
  }
  if (open_rise) out.incomplete.push_back(*open_rise);
  return out;
}

ResidualResult compute_residuals(const GriddedSeries& y_hat,
                                 std::span<const LabEvent> events) {
  ResidualResult out;
  for (const auto& ev : events) {
    if (!ev.accepted) continue;
    const Timestamp t = ev.sample_time + ev.sample_offset;
    // ZOH lookup: last present grid value at or before t
    std::optional<double> pred;
    if (t >= y_hat.start()) {
      std::int64_t k = (t - y_hat.start()) / y_hat.interval();
      if (k >= static_cast<std::int64_t>(y_hat.size()))
        k = static_cast<std::int64_t>(y_hat.size()) - 1;
      for (; k >= 0; --k) {
        if (y_hat[static_cast<size_t>(k)]) {
          pred = y_hat[static_cast<size_t>(k)];
          break;
        }
      }
    }
    if (!pred) {
      out.warnings.push_back("event at " + format_iso8601(ev.sample_time) +
                             ": prediction absent at sample time; skipped");
      continue;
    }
    Residual res;
    res.event = ev;
    res.y_hat_at_sample = *pred;
    res.r = *pred - ev.value;
    out.residuals.push_back(res);
  }
  return out;
}

BiasState update_bias(BiasState state, const Residual& res) {
  if (!(state.alpha > 0.0 && state.alpha <= 1.0))
    throw ValidationError("update_bias: alpha must be in (0, 1]");
  if (!res.event.accepted)
    throw ValidationError("update_bias: residual must come from an accepted event");
  state.b = (1.0 - state.alpha) * state.b + state.alpha * res.r;
  state.last_accepted = res.event;
  return state;
}

double correct_prediction(double y_hat, const BiasState& state) {
  return y_hat - state.b;
}

void write_lab_audit_csv(std::ostream& out, std::span<const LabEvent> events,
                         std::span<const Residual> residuals, double alpha) {
  out << "t_i,t_j,value,accepted,y_hat_at_sample,residual,bias_after\n";
  BiasState bias;
  bias.alpha = alpha;
  size_t ri = 0;
  for (const auto& ev : events) {
    out << format_iso8601(ev.sample_time) << ',' << format_iso8601(ev.result_time)
        << ',' << ingest::format_double(ev.value) << ','
        << (ev.accepted ? "true" : "false") << ',';
    if (ri < residuals.size() &&
        residuals[ri].event.sample_time == ev.sample_time) {
      bias = update_bias(bias, residuals[ri]);
      out << ingest::format_double(residuals[ri].y_hat_at_sample) << ','
          << ingest::format_double(residuals[ri].r) << ','
          << ingest::format_double(bias.b);
      ++ri;
    } else {
      out << ",,";
      if (bias.last_accepted) out << ingest::format_double(bias.b);
    }
    out << '\n';
  }
}

} // namespace histprep::align
