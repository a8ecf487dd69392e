#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "histprep/core/series.hpp"

namespace histprep::align {

struct LabParseResult {
  std::vector<LabEvent> events;       // complete cycles, in time order
  std::vector<Timestamp> incomplete;  // rising edges still open at stream end
  std::vector<std::string> warnings;
};

/// Reconstruct lab sample cycles from the operator-toggled indicator: a
/// rising edge marks sample collection (t_i), the next falling edge marks
/// result return (t_j). The event value is the latest results-tag update in
/// [t_j - accept_window, t_j + accept_window]; the event is accepted iff the
/// acceptance tag pulses (rises) within [t_j, t_j + accept_window].
/// delta_t is the configured sample-collection-time uncertainty, recorded on
/// every event. Cycles still open at stream end are surfaced as incomplete,
/// never guessed. Indicator values outside {0,1} (tolerance 1e-6) are a
/// validation error; a falling edge with no preceding rise is warned and
/// skipped.
LabParseResult parse_lab_events(const RawSeries& indicator, const RawSeries& results,
                                const RawSeries* acceptance, Duration accept_window,
                                Duration delta_t);

struct Residual {
  LabEvent event;
  double y_hat_at_sample = 0.0; // prediction at t_i + delta_t (ZOH lookup)
  double r = 0.0;               // y_hat_at_sample - event.value
};

struct ResidualResult {
  std::vector<Residual> residuals;
  std::vector<std::string> warnings; // skipped events (absent prediction)
};

/// Residuals r = y_hat(t_i + delta) - y_j for accepted events, evaluated at
/// the sampling time rather than the result time. Non-accepted events are
/// skipped; so are events whose prediction is absent (warned).
ResidualResult compute_residuals(const GriddedSeries& y_hat,
                                 std::span<const LabEvent> events);

/// Lag-filtered bias over accepted residuals. The bias holds between lab
/// events (zero-order hold).
struct BiasState {
  double b = 0.0;
  double alpha = 0.3; // (0, 1]; 1 = no filtering
  std::optional<LabEvent> last_accepted;
};

/// b <- (1 - alpha) * b + alpha * r
BiasState update_bias(BiasState state, const Residual& res);

/// Corrected prediction: y_hat - b.
double correct_prediction(double y_hat, const BiasState& state);

/// Audit CSV: t_i,t_j,value,accepted,y_hat_at_sample,residual,bias_after.
/// Rows for all events; residual columns empty for events without one.
void write_lab_audit_csv(std::ostream& out, std::span<const LabEvent> events,
                         std::span<const Residual> residuals, double alpha);

} // namespace histprep::align
