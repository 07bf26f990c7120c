#include "spinelaw/exact.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>

namespace spinelaw::exact {

auto poisson_cdf(double mean, std::size_t k) -> double {
  if (mean == 0.0) return 1.0;
  return boost::math::cdf(boost::math::poisson_distribution<double>{mean}, static_cast<double>(k));
}

auto poisson_window_probability(double mean, double t, double target, double epsilon) -> double {
  const auto lo = std::max(0.0, std::floor(t * (target - epsilon)) - 1.0);
  const auto hi = std::ceil(t * (target + epsilon)) + 1.0;
  auto total = 0.0;
  for (auto k = lo; k <= hi; k += 1.0) {
    if (!(std::abs(k / t - target) < epsilon)) continue;
    if (mean == 0.0) {
      total += k == 0.0 ? 1.0 : 0.0;
    } else {
      total += boost::math::pdf(boost::math::poisson_distribution<double>{mean}, k);
    }
  }
  return total;
}

auto gaussian_window_probability(double drift, double sigma, double t, double speed, double epsilon) -> double {
  const auto dist = boost::math::normal_distribution<double>{drift * t, sigma * std::sqrt(t)};
  return boost::math::cdf(dist, (speed + epsilon) * t) - boost::math::cdf(dist, (speed - epsilon) * t);
}

auto stationary_law(const Two_state_chain& chain) -> std::array<double, 2> {
  const auto q = chain.q01 + chain.q10;
  return {chain.q10 / q, chain.q01 / q};
}

auto chain_state_one_probability(const Two_state_chain& chain, int start, double t) -> double {
  const auto q = chain.q01 + chain.q10;
  const auto pi1 = chain.q01 / q;
  return pi1 + ((start == 1 ? 1.0 : 0.0) - pi1) * std::exp(-q * t);
}

auto chain_occupation_mean(const Two_state_chain& chain, int start, double t) -> double {
  const auto q = chain.q01 + chain.q10;
  const auto pi1 = chain.q01 / q;
  return pi1 + ((start == 1 ? 1.0 : 0.0) - pi1) * (-std::expm1(-q * t)) / (q * t);
}

}  // namespace spinelaw::exact
