#include "histprep/synth/lab_channel.hpp"

#include <cmath>

#include "histprep/core/errors.hpp"
#include "histprep/core/random.hpp"

namespace histprep::synth {

namespace {

double truth_at(const GriddedSeries& truth, Timestamp t) {
  if (t < truth.start())
    throw GenerationError("gen_lab_channel: schedule time " + format_iso8601(t) +
                          " precedes the truth series");
  std::int64_t k = (t - truth.start()) / truth.interval();
  if (k >= static_cast<std::int64_t>(truth.size()))
    k = static_cast<std::int64_t>(truth.size()) - 1;
  for (; k >= 0; --k) {
    if (truth[static_cast<size_t>(k)]) return *truth[static_cast<size_t>(k)];
  }
  throw GenerationError("gen_lab_channel: truth absent at " + format_iso8601(t));
}

} // namespace

LabChannel gen_lab_channel(const GriddedSeries& truth,
                           const std::vector<Timestamp>& schedule,
                           const LabChannelParams& params, std::uint64_t seed) {
  if (schedule.empty())
    throw GenerationError("gen_lab_channel: empty schedule");
  if (params.result_delay_lo.us <= 0 || params.result_delay_hi < params.result_delay_lo)
    throw GenerationError("gen_lab_channel: need 0 < delay_lo <= delay_hi");
  if (params.reject_fraction < 0 || params.reject_fraction > 1)
    throw GenerationError("gen_lab_channel: reject_fraction must be in [0, 1]");
  for (size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i - 1] < schedule[i]))
      throw GenerationError("gen_lab_channel: schedule must be strictly increasing");
    if (schedule[i] - schedule[i - 1] <= params.result_delay_hi + params.pulse_width)
      throw GenerationError("gen_lab_channel: schedule gap at " +
                            format_iso8601(schedule[i]) +
                            " does not exceed the max result delay (cycles overlap)");
  }

  rng::Engine eng(seed);
  // A zero sample ahead of the first cycle so the first rise is a real edge.
  const Timestamp idle = std::min(truth.start(), schedule.front() - minutes(1));

  std::vector<RawSample> ind{{idle, 0.0, Quality::Good}};
  std::vector<RawSample> res;
  std::vector<RawSample> acc{{idle, 0.0, Quality::Good}};
  LabChannel out;

  for (const Timestamp t_i : schedule) {
    const double delay_us = eng.uniform(static_cast<double>(params.result_delay_lo.us),
                                        static_cast<double>(params.result_delay_hi.us));
    const Timestamp t_j = t_i + Duration{static_cast<std::int64_t>(std::llround(delay_us))};
    const double value = truth_at(truth, t_i) +
                         (params.meas_sigma > 0 ? eng.normal(0.0, params.meas_sigma) : 0.0);
    const bool accepted = !eng.bernoulli(params.reject_fraction);

    ind.push_back({t_i, 1.0, Quality::Good});
    ind.push_back({t_j, 0.0, Quality::Good});
    res.push_back({t_j, value, Quality::Good});
    if (accepted) {
      acc.push_back({t_j, 1.0, Quality::Good});
      acc.push_back({t_j + params.pulse_width, 0.0, Quality::Good});
    }
    out.truth.push_back({t_i, t_j, value, accepted});
  }

  out.indicator = RawSeries("lab_indicator", std::move(ind));
  out.results = RawSeries("lab_result", std::move(res));
  out.acceptance = RawSeries("lab_acceptance", std::move(acc));
  return out;
}

} // namespace histprep::synth
