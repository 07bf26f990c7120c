#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "spinelaw/model.hpp"

namespace spinelaw::exact {

// P(N <= k), N ~ Poisson(mean).
auto poisson_cdf(double mean, std::size_t k) -> double;

// P(|N / t - target| < epsilon), N ~ Poisson(mean), with the comparison evaluated exactly as
// the birth-rate indicator evaluates it.
auto poisson_window_probability(double mean, double t, double target, double epsilon) -> double;

// P(|X / t - speed| < epsilon), X ~ Normal(drift t, sigma^2 t).
auto gaussian_window_probability(double drift, double sigma, double t, double speed, double epsilon) -> double;

// Stationary law (pi_0, pi_1) of the two-state chain.
auto stationary_law(const Two_state_chain& chain) -> std::array<double, 2>;

// P(X(t) = 1 | X(0) = start).
auto chain_state_one_probability(const Two_state_chain& chain, int start, double t) -> double;

// E[(1/t) int_0^t 1{X(s) = 1} ds | X(0) = start].
auto chain_occupation_mean(const Two_state_chain& chain, int start, double t) -> double;

}  // namespace spinelaw::exact
