#include "histprep/synth/foptd.hpp"

#include <cmath>

#include "histprep/core/errors.hpp"
#include "histprep/core/random.hpp"

namespace histprep::synth {

void FoptdParams::validate() const {
  if (time_constant.us <= 0)
    throw GenerationError("FoptdParams: time_constant must be positive");
  if (dead_time.us < 0)
    throw GenerationError("FoptdParams: dead_time must be non-negative");
  if (noise_sigma < 0)
    throw GenerationError("FoptdParams: noise_sigma must be non-negative");
}

int foptd_dead_steps(const FoptdParams& p, Duration interval) {
  return static_cast<int>(std::llround(static_cast<double>(p.dead_time.us) /
                                       static_cast<double>(interval.us)));
}

namespace {

double present_or_throw(const GriddedSeries& u, size_t k) {
  if (!u[k])
    throw GenerationError("gen_foptd: input '" + u.tag() + "' absent at slot " +
                          std::to_string(k) + "; synthetic inputs must be dense");
  return *u[k];
}

} // namespace

GriddedSeries gen_foptd(const FoptdParams& p, const GriddedSeries& u,
                        std::uint64_t seed, const TagId& out_tag) {
  p.validate();
  const double a = std::exp(-static_cast<double>(u.interval().us) /
                            static_cast<double>(p.time_constant.us));
  const int d = foptd_dead_steps(p, u.interval());

  rng::Engine eng(seed);
  std::vector<std::optional<double>> out(u.size());
  double y = p.gain * present_or_throw(u, 0); // steady at the initial input
  for (size_t k = 0; k < u.size(); ++k) {
    const size_t src = static_cast<long>(k) >= d ? k - static_cast<size_t>(d) : 0;
    y = a * y + p.gain * (1.0 - a) * present_or_throw(u, src);
    double v = y;
    if (p.noise_sigma > 0) v += eng.normal(0.0, p.noise_sigma);
    out[k] = v;
  }
  return GriddedSeries(out_tag, u.start(), u.interval(), std::move(out), u.method());
}

GriddedSeries gen_prbs(const TagId& tag, Timestamp start, Duration interval,
                       std::size_t n, double lo, double hi,
                       std::size_t min_hold_steps, std::uint64_t seed) {
  if (n == 0) throw GenerationError("gen_prbs: n must be >= 1");
  if (min_hold_steps == 0) min_hold_steps = 1;
  rng::Engine eng(seed);
  std::vector<std::optional<double>> out(n);
  bool high = eng.bernoulli(0.5);
  size_t next_flip = 0;
  for (size_t k = 0; k < n; ++k) {
    if (k == next_flip) {
      if (k > 0) high = !high;
      const double dwell = eng.uniform(static_cast<double>(min_hold_steps),
                                       static_cast<double>(3 * min_hold_steps));
      next_flip = k + static_cast<size_t>(dwell);
      if (next_flip == k) next_flip = k + 1;
    }
    out[k] = high ? hi : lo;
  }
  return GriddedSeries(tag, start, interval, std::move(out));
}

LoopResult gen_closed_loop(const FoptdParams& plant, PiGains pi,
                           const GriddedSeries& setpoint, double disturbance_sigma,
                           std::uint64_t seed) {
  plant.validate();
  const size_t n = setpoint.size();
  const double dt = setpoint.interval().seconds();
  const double a = std::exp(-static_cast<double>(setpoint.interval().us) /
                            static_cast<double>(plant.time_constant.us));
  const int d = foptd_dead_steps(plant, setpoint.interval());

  rng::Engine eng(seed);
  constexpr double kDistPole = 0.95;
  const double w_sigma = disturbance_sigma * std::sqrt(1.0 - kDistPole * kDistPole);

  std::vector<std::optional<double>> mv(n), cv(n);
  std::vector<RawSample> mode(n);

  const double sp0 = present_or_throw(setpoint, 0);
  const double mv_init = plant.gain != 0.0 ? sp0 / plant.gain : 0.0;
  std::vector<double> mv_hist(static_cast<size_t>(d) + 1, mv_init);
  double plant_state = sp0;
  double dist = 0.0;
  double e_prev = 0.0;
  double mv_prev = mv_init;

  for (size_t k = 0; k < n; ++k) {
    // plant sees the MV from d+1 steps ago (one step of controller latency)
    const double u_delayed = mv_hist.front();
    plant_state = a * plant_state + plant.gain * (1.0 - a) * u_delayed;
    dist = kDistPole * dist + (w_sigma > 0 ? eng.normal(0.0, w_sigma) : 0.0);
    double meas = plant_state + dist;
    if (plant.noise_sigma > 0) meas += eng.normal(0.0, plant.noise_sigma);
    if (std::abs(meas) > 1e6)
      throw GenerationError("gen_closed_loop: cv diverged (|cv| > 1e6); "
                            "reduce kp/ki or check the plant gain sign");

    const double e = present_or_throw(setpoint, k) - meas;
    const double dmv = pi.kp * (e - e_prev) + pi.ki * dt * e;
    const double u = mv_prev + dmv;

    cv[k] = meas;
    mv[k] = u;
    mode[k] = {setpoint.time_at(k), 1.0, Quality::Good}; // AUTO

    mv_hist.erase(mv_hist.begin());
    mv_hist.push_back(u);
    e_prev = e;
    mv_prev = u;
  }

  LoopResult res{
      GriddedSeries("mv", setpoint.start(), setpoint.interval(), std::move(mv)),
      GriddedSeries("cv", setpoint.start(), setpoint.interval(), std::move(cv)),
      RawSeries("loop_mode", std::move(mode))};
  return res;
}

LoopResult gen_open_loop(const FoptdParams& plant, const GriddedSeries& mv_excitation,
                         std::uint64_t seed) {
  GriddedSeries cv = gen_foptd(plant, mv_excitation, seed, "cv");
  std::vector<RawSample> mode(mv_excitation.size());
  for (size_t k = 0; k < mv_excitation.size(); ++k)
    mode[k] = {mv_excitation.time_at(k), 0.0, Quality::Good}; // MAN
  return LoopResult{mv_excitation.with_tag("mv"), std::move(cv),
                    RawSeries("loop_mode", std::move(mode))};
}

} // namespace histprep::synth
