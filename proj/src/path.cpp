#include "spinelaw/path.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace spinelaw {

auto Path_view::value_at(double t) const -> State {
  if (times.empty() || !covers(t)) {
    throw Error{Error_kind::path_domain,
                fmt::format("time {} outside path domain [{}, {}]", t,
                            times.empty() ? 0.0 : start(), end)};
  }
  // Last knot with time <= t.
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(it - times.begin()) - 1;
  if (kind == Path_kind::piecewise_constant || i + 1 == times.size() || times[i] == t) {
    return values[i];
  }
  const auto w = (t - times[i]) / (times[i + 1] - times[i]);
  return values[i] + w * (values[i + 1] - values[i]);
}

auto Path_view::jump_count() const -> std::size_t {
  auto jumps = std::size_t{0};
  for (auto i = std::size_t{1}; i < values.size(); ++i) {
    if (values[i] != values[i - 1]) ++jumps;
  }
  return jumps;
}

Path::Path(Path_kind kind, double start, State value)
    : kind_{kind}, times_{start}, values_{value}, end_{start} {}

auto Path::constant(State value, double start, double end) -> Path {
  auto path = Path{Path_kind::piecewise_constant, start, value};
  path.extend_to(end);
  return path;
}

void Path::append(double t, State value) {
  if (times_.empty()) {
    times_.push_back(t);
    values_.push_back(value);
    end_ = t;
    return;
  }
  if (t < end_ || t <= times_.back()) {
    throw Error{Error_kind::path_domain, fmt::format("knot at {} precedes path end {}", t, end_)};
  }
  times_.push_back(t);
  values_.push_back(value);
  end_ = t;
}

void Path::extend_to(double t) {
  if (kind_ != Path_kind::piecewise_constant) {
    throw Error{Error_kind::path_domain, "sampled paths are extended by appending knots"};
  }
  if (t < end_) {
    throw Error{Error_kind::path_domain, fmt::format("cannot shrink path end {} to {}", end_, t)};
  }
  end_ = t;
}

void Path::concatenate(Path_view other) {
  if (other.times.empty()) return;
  if (times_.empty()) {
    kind_ = other.kind;
    times_.assign(other.times.begin(), other.times.end());
    values_.assign(other.values.begin(), other.values.end());
    end_ = other.end;
    return;
  }
  if (other.kind != kind_ || other.start() != end_) {
    throw Error{Error_kind::path_domain,
                fmt::format("path segment starting at {} does not continue path ending at {}",
                            other.start(), end_)};
  }
  auto first = std::size_t{0};
  if (kind_ == Path_kind::sampled) {
    // Junction knot is shared.
    first = 1;
  } else if (other.values[0] == values_.back()) {
    first = 1;
  }
  for (auto i = first; i < other.times.size(); ++i) {
    times_.push_back(other.times[i]);
    values_.push_back(other.values[i]);
  }
  end_ = other.end;
}

auto Path::restricted(double from, double to) const -> Path { return restrict_path(view(), from, to); }

auto restrict_path(Path_view path, double from, double to) -> Path {
  if (path.times.empty() || from < path.start() || to > path.end || from > to) {
    throw Error{Error_kind::path_domain,
                fmt::format("restriction [{}, {}] outside path domain", from, to)};
  }
  auto out = Path{path.kind, from, path.value_at(from)};
  for (auto i = std::size_t{0}; i < path.times.size(); ++i) {
    if (path.times[i] > from && path.times[i] < to) {
      out.append(path.times[i], path.values[i]);
    }
  }
  if (path.kind == Path_kind::sampled) {
    if (to > from) out.append(to, path.value_at(to));
  } else {
    out.extend_to(to);
  }
  return out;
}

}  // namespace spinelaw
