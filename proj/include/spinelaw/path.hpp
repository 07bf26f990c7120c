#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "spinelaw/error.hpp"

namespace spinelaw {

// Motion state. Encoding depends on the motion model: 0 for the single state of
// the no-motion model, the state index for a finite chain, the position for a diffusion.
using State = double;

// Piecewise-constant paths hold each knot value until the next knot (chains).
// Sampled paths interpolate linearly between knots and integrate by trapezoid (diffusions);
// their last knot sits exactly at `end`.
enum class Path_kind { piecewise_constant, sampled };

struct Path_view {
  Path_kind kind = Path_kind::piecewise_constant;
  std::span<const double> times;
  std::span<const double> values;
  double end = 0.0;

  auto start() const -> double { return times.front(); }
  auto start_value() const -> State { return values.front(); }
  auto knot_count() const -> std::size_t { return times.size(); }
  auto covers(double t) const -> bool { return t >= start() && t <= end; }

  // Value at t; throws Path_domain when t is outside [start, end].
  auto value_at(double t) const -> State;
  auto terminal_value() const -> State { return value_at(end); }

  // Number of value changes along a piecewise-constant path.
  auto jump_count() const -> std::size_t;
};

class Path {
 public:
  Path() = default;
  Path(Path_kind kind, double start, State value);

  static auto constant(State value, double start, double end) -> Path;

  auto kind() const -> Path_kind { return kind_; }
  auto view() const -> Path_view { return {kind_, times_, values_, end_}; }
  auto start() const -> double { return times_.front(); }
  auto end() const -> double { return end_; }
  auto empty() const -> bool { return times_.empty(); }
  auto times() const -> std::span<const double> { return times_; }
  auto values() const -> std::span<const double> { return values_; }

  auto value_at(double t) const -> State { return view().value_at(t); }

  // Appends a knot at t >= end(); the path end advances to t.
  void append(double t, State value);
  // Extends the path end without adding a knot (piecewise-constant only).
  void extend_to(double t);
  // Appends `other`, which must start where this path ends. Redundant junction knots are dropped.
  void concatenate(Path_view other);

  auto restricted(double from, double to) const -> Path;

 private:
  Path_kind kind_ = Path_kind::piecewise_constant;
  std::vector<double> times_;
  std::vector<double> values_;
  double end_ = 0.0;
};

auto restrict_path(Path_view path, double from, double to) -> Path;

// Integral of g(X(s)) over [from, to] along the path. Exact for piecewise-constant paths;
// trapezoid on the path's own knots for sampled paths.
template <typename G>
auto integrate(Path_view path, G&& g, double from, double to) -> double {
  if (path.times.empty() || from < path.start() || to > path.end || from > to) {
    throw Error{Error_kind::path_domain, "integration range outside path domain"};
  }
  const auto n = path.times.size();
  // First knot index whose time is > from.
  auto i = std::size_t{0};
  while (i < n && path.times[i] <= from) ++i;

  auto total = 0.0;
  auto compensation = 0.0;
  auto add = [&](double x) {
    const auto sum = total + x;
    if (std::abs(total) >= std::abs(x)) {
      compensation += (total - sum) + x;
    } else {
      compensation += (x - sum) + total;
    }
    total = sum;
  };

  if (path.kind == Path_kind::piecewise_constant) {
    auto current = path.values[i - 1];
    auto t = from;
    for (; i < n && path.times[i] < to; ++i) {
      add(g(current) * (path.times[i] - t));
      t = path.times[i];
      current = path.values[i];
    }
    add(g(current) * (to - t));
  } else {
    auto t = from;
    auto g_prev = g(path.value_at(from));
    for (; i < n && path.times[i] < to; ++i) {
      const auto g_next = g(path.values[i]);
      add(0.5 * (g_prev + g_next) * (path.times[i] - t));
      t = path.times[i];
      g_prev = g_next;
    }
    add(0.5 * (g_prev + g(path.value_at(to))) * (to - t));
  }
  return total + compensation;
}

// Integral over [start, t].
template <typename G>
auto path_integral(Path_view path, G&& g, double t) -> double {
  if (path.times.empty()) {
    throw Error{Error_kind::path_domain, "empty path"};
  }
  return integrate(path, std::forward<G>(g), path.start(), t);
}

}  // namespace spinelaw
