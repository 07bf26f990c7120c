#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinelaw/model.hpp"
#include "spinelaw/rng.hpp"

namespace spinelaw {

// How a single lifetime is run. Under the original measure both fields take their defaults;
// the spine under the tilted measure branches (1 + M) times faster and may carry a drift.
struct Lifetime_law {
  double rate_multiplier = 1.0;
  double drift = 0.0;
};

struct Lifetime_outcome {
  double end = 0.0;    // death time, or the horizon when the particle survives it
  bool died = false;
  State end_state = 0.0;
};

// Samples the motion path and death time of one particle born at `birth` in `start`,
// stopped at `horizon`. Knots, starting with the birth knot, are appended to `times`/`values`.
//
// Constant rates draw the lifetime first and the path afterwards. State-dependent rates use
// thinning against rate_multiplier * R_max, interleaved with the chain's jumps.
//
// Diffusion paths are drawn in two layers: exact Gaussian increments on the skeleton
// {birth, observation times, end} from `rng`, then Brownian bridges from `bridge_seed` on the
// h-grid between skeleton points. Values at skeleton times therefore do not depend on h.
auto sample_lifetime(const Model_spec& spec, const Lifetime_law& law, double birth, State start, double horizon,
                     std::span<const double> observation_times, Rng& rng, std::uint64_t bridge_seed,
                     std::vector<double>& times, std::vector<double>& values) -> Lifetime_outcome;

// Motion only, over [from, to], with no branching. Appends knots after the one at `from`
// (which the caller must already have written). Returns the state at `to`.
auto sample_motion(const Model_spec& spec, double drift, double from, State start, double to,
                   std::span<const double> observation_times, Rng& rng, std::uint64_t bridge_seed,
                   std::vector<double>& times, std::vector<double>& values) -> State;

}  // namespace spinelaw
