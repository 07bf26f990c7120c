#include "spinelaw/stats.hpp"

#include <cmath>

#include "spinelaw/error.hpp"

namespace spinelaw {

auto mean_of(std::span<const double> values) -> double {
  if (values.empty()) {
    throw Error{Error_kind::insufficient_data, "mean of an empty sample"};
  }
  auto sum = 0.0;
  auto c = 0.0;
  for (const auto x : values) {
    const auto t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return (sum + c) / static_cast<double>(values.size());
}

auto summarize(std::span<const double> values, std::optional<double> oracle) -> Summary {
  if (values.size() < 2) {
    throw Error{Error_kind::insufficient_data, "standard error needs at least two values"};
  }
  const auto n = static_cast<double>(values.size());
  auto out = Summary{};
  out.count = values.size();
  out.mean = mean_of(values);
  auto ss = 0.0;
  for (const auto x : values) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  out.ci_lo = out.mean - 1.96 * out.se;
  out.ci_hi = out.mean + 1.96 * out.se;
  if (oracle) {
    if (out.se > 0.0) {
      out.z = (out.mean - *oracle) / out.se;
    } else if (out.mean == *oracle) {
      out.z = 0.0;
    }
  }
  return out;
}

auto two_sample_z(const Summary& a, const Summary& b) -> double {
  const auto se = std::sqrt(a.se * a.se + b.se * b.se);
  if (se == 0.0) return a.mean == b.mean ? 0.0 : std::copysign(INFINITY, a.mean - b.mean);
  return (a.mean - b.mean) / se;
}

}  // namespace spinelaw
