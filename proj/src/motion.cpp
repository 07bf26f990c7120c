#include "spinelaw/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace spinelaw {

namespace {

constexpr auto k_inf = std::numeric_limits<double>::infinity();

auto exponential(Rng& rng, double rate) -> double {
  if (!(rate > 0.0)) return k_inf;
  return std::exponential_distribution<double>{rate}(rng);
}

// Runs the chain from (t, state) up to `stop`, appending a knot at every jump before it.
auto advance_chain(const Two_state_chain& chain, double t, State state, double stop, Rng& rng,
                   std::vector<double>& times, std::vector<double>& values) -> State {
  while (true) {
    const auto rate = state == 0.0 ? chain.q01 : chain.q10;
    const auto jump = t + exponential(rng, rate);
    if (!(jump < stop)) return state;
    state = 1.0 - state;
    t = jump;
    times.push_back(t);
    values.push_back(state);
  }
}

auto advance_brownian(double sigma, double drift, double step, double from, State start, double to,
                      std::span<const double> observation_times, Rng& rng, std::uint64_t bridge_seed,
                      std::vector<double>& times, std::vector<double>& values) -> State {
  if (!(to > from)) return start;
  auto increments = std::normal_distribution<double>{0.0, 1.0};
  auto bridge_rng = Rng{bridge_seed};
  auto bridge = std::normal_distribution<double>{0.0, 1.0};
  const auto eps = 1e-9 * step;

  auto a = from;
  auto xa = start;
  auto fill_to = [&](double b) {
    const auto dt = b - a;
    const auto xb = xa + drift * dt + sigma * std::sqrt(dt) * increments(rng);
    // Brownian bridge on the h-grid strictly inside (a, b).
    auto sp = a;
    auto xp = xa;
    for (auto k = std::floor(a / step) + 1.0;; k += 1.0) {
      const auto s = k * step;
      if (!(s < b - eps)) break;
      if (s <= a + eps) continue;
      const auto span = b - sp;
      const auto mean = xp + (s - sp) / span * (xb - xp);
      const auto var = sigma * sigma * (s - sp) * (b - s) / span;
      xp = mean + std::sqrt(var) * bridge(bridge_rng);
      sp = s;
      times.push_back(s);
      values.push_back(xp);
    }
    times.push_back(b);
    values.push_back(xb);
    a = b;
    xa = xb;
  };

  auto obs = std::upper_bound(observation_times.begin(), observation_times.end(), from);
  for (; obs != observation_times.end() && *obs < to; ++obs) {
    fill_to(*obs);
  }
  fill_to(to);
  return xa;
}

}  // namespace

auto sample_motion(const Model_spec& spec, double drift, double from, State start, double to,
                   std::span<const double> observation_times, Rng& rng, std::uint64_t bridge_seed,
                   std::vector<double>& times, std::vector<double>& values) -> State {
  if (const auto* chain = std::get_if<Two_state_chain>(&spec.motion.kind)) {
    return advance_chain(*chain, from, start, to, rng, times, values);
  }
  if (const auto* bm = std::get_if<Brownian_motion>(&spec.motion.kind)) {
    return advance_brownian(bm->sigma, drift, spec.motion.path_step, from, start, to, observation_times, rng,
                            bridge_seed, times, values);
  }
  return start;
}

auto sample_lifetime(const Model_spec& spec, const Lifetime_law& law, double birth, State start, double horizon,
                     std::span<const double> observation_times, Rng& rng, std::uint64_t bridge_seed,
                     std::vector<double>& times, std::vector<double>& values) -> Lifetime_outcome {
  times.push_back(birth);
  values.push_back(start);

  if (spec.rate.is_constant()) {
    const auto death = birth + exponential(rng, law.rate_multiplier * spec.rate.bound());
    const auto died = death < horizon;
    const auto end = died ? death : horizon;
    const auto end_state =
        sample_motion(spec, law.drift, birth, start, end, observation_times, rng, bridge_seed, times, values);
    return {end, died, end_state};
  }

  // Thinning. Only finite-state motions reach here (validated), so paths are piecewise constant.
  const auto bound = law.rate_multiplier * spec.rate.bound();
  auto t = birth;
  auto state = start;
  while (true) {
    const auto proposal = t + exponential(rng, bound);
    const auto stop = std::min(proposal, horizon);
    state = sample_motion(spec, law.drift, t, state, stop, observation_times, rng, bridge_seed, times, values);
    if (!(proposal < horizon)) return {horizon, false, state};
    if (rng.uniform() * bound < law.rate_multiplier * spec.rate.at(state)) {
      return {proposal, true, state};
    }
    t = proposal;
  }
}

}  // namespace spinelaw
