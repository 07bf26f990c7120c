#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace spinelaw {

struct Summary {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::optional<double> z;  // (mean - oracle) / se, when an oracle is given and se > 0
  std::size_t count = 0;
};

// Sample mean, standard error (n - 1 denominator), CI95 = mean +- 1.96 se.
// Throws Insufficient_data for fewer than two values.
auto summarize(std::span<const double> values, std::optional<double> oracle = std::nullopt) -> Summary;

// Compensated mean; usable with a single value.
auto mean_of(std::span<const double> values) -> double;

// z-score of a difference of two independent estimates.
auto two_sample_z(const Summary& a, const Summary& b) -> double;

}  // namespace spinelaw
