#include "spinelaw/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace spinelaw {

namespace {

class Neumaier {
 public:
  void add(double x) {
    const auto t = sum_ + x;
    c_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  auto value() const -> double { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

void require_positive_time(double t, const char* what) {
  if (!(t > 0.0)) {
    throw Error{Error_kind::query_out_of_range, fmt::format("{} is defined for t > 0 only (t={})", what, t)};
  }
}

auto index_of(const Tree& tree, const Label& u) -> Particle_index {
  const auto i = tree.find(u);
  if (!i) throw Error{Error_kind::not_alive, fmt::format("no particle labelled {}", u.to_string())};
  return *i;
}

auto root_start(const Tree& tree) -> State { return tree.path(0).start_value(); }

}  // namespace

auto Occupation_average::apply_g(double x) const -> double {
  switch (g) {
    case Occupation_map::identity: return x;
    case Occupation_map::square: return x * x;
    case Occupation_map::window: return (window_lo < x && x < window_hi) ? 1.0 : 0.0;
  }
  return x;
}

void validate_functional(const Additive_functional& f, const Model_spec& spec) {
  if (const auto* b = std::get_if<Birth_rate_indicator>(&f)) {
    if (!(b->epsilon > 0.0) || !std::isfinite(b->target)) {
      throw Error{Error_kind::invalid_model, "functional.epsilon: must be > 0 with a finite target"};
    }
  } else if (const auto* o = std::get_if<Occupation_average>(&f)) {
    const auto states = spec.motion.state_count();
    if (states == 0) {
      throw Error{Error_kind::invalid_model, "functional.h: occupation averages need a finite-state motion"};
    }
    if (o->h.size() != states) {
      throw Error{Error_kind::invalid_model,
                  fmt::format("functional.h: table has {} entries, motion has {} states", o->h.size(), states)};
    }
    if (o->g == Occupation_map::window && !(o->window_lo < o->window_hi)) {
      throw Error{Error_kind::invalid_model, "functional.g: window needs lo < hi"};
    }
  } else if (const auto* s = std::get_if<Terminal_speed_indicator>(&f)) {
    if (!spec.motion.is_brownian()) {
      throw Error{Error_kind::invalid_model, "functional.kind: terminal speed needs Brownian motion"};
    }
    if (!(s->epsilon > 0.0)) {
      throw Error{Error_kind::invalid_model, "functional.epsilon: must be > 0"};
    }
  }
}

// ---------------------------------------------------------------------------

Population_snapshot::Population_snapshot(const Tree& tree, const Model_spec& spec, double t) {
  assign(tree, spec, t);
}

void Population_snapshot::assign(const Tree& tree, const Model_spec& spec, double t) {
  t_ = t;
  tree.alive_indices(t, alive_);
  log_weights_.assign(alive_.size(), 0.0);
  const auto excess = spec.branching_excess();
  if (spec.rate.is_constant()) {
    std::fill(log_weights_.begin(), log_weights_.end(), -excess * spec.rate.bound() * t);
  } else {
    auto integrals = std::vector<double>{};
    ancestral_integrals(tree, alive_, t, [&](State x) { return spec.rate.at(x); }, integrals);
    for (auto k = std::size_t{0}; k < alive_.size(); ++k) log_weights_[k] = -excess * integrals[k];
  }
  if (const auto lambda = spec.girsanov_lambda(); lambda != 0.0) {
    const auto sigma = spec.sigma();
    const auto x0 = alive_.empty() ? 0.0 : root_start(tree);
    const auto drift_term = 0.5 * lambda * lambda * sigma * sigma * t;
    for (auto k = std::size_t{0}; k < alive_.size(); ++k) {
      log_weights_[k] += lambda * (tree.path(alive_[k]).value_at(t) - x0) - drift_term;
    }
  }
  max_log_weight_ = alive_.empty() ? 0.0 : *std::max_element(log_weights_.begin(), log_weights_.end());
  auto total = Neumaier{};
  for (const auto lw : log_weights_) total.add(std::exp(lw - max_log_weight_));
  shifted_total_ = total.value();
}

auto Population_snapshot::z() const -> double {
  if (extinct()) return 0.0;
  return std::exp(max_log_weight_) * shifted_total_;
}

auto Population_snapshot::log_z() const -> double {
  if (extinct()) return -std::numeric_limits<double>::infinity();
  return max_log_weight_ + std::log(shifted_total_);
}

auto Population_snapshot::weighted_total(std::span<const double> values) const -> double {
  auto total = Neumaier{};
  for (auto k = std::size_t{0}; k < alive_.size(); ++k) {
    total.add(values[k] * std::exp(log_weights_[k] - max_log_weight_));
  }
  return extinct() ? 0.0 : std::exp(max_log_weight_) * total.value();
}

auto Population_snapshot::normalized(std::span<const double> values) const -> double {
  if (extinct()) {
    throw Error{Error_kind::extinction_at_t, fmt::format("no particle alive at t={}", t_)};
  }
  auto total = Neumaier{};
  for (auto k = std::size_t{0}; k < alive_.size(); ++k) {
    total.add(values[k] * std::exp(log_weights_[k] - max_log_weight_));
  }
  return total.value() / shifted_total_;
}

auto Population_snapshot::posterior() const -> std::vector<double> {
  if (extinct()) {
    throw Error{Error_kind::extinction_at_t, fmt::format("no particle alive at t={}", t_)};
  }
  auto out = std::vector<double>(alive_.size());
  for (auto k = std::size_t{0}; k < alive_.size(); ++k) {
    out[k] = std::exp(log_weights_[k] - max_log_weight_) / shifted_total_;
  }
  return out;
}

void functional_values(const Additive_functional& f, const Tree& tree, const Population_snapshot& snapshot,
                       std::vector<double>& out) {
  const auto alive = snapshot.alive();
  const auto t = snapshot.t();
  out.resize(alive.size());
  if (std::holds_alternative<Unit_functional>(f)) {
    std::fill(out.begin(), out.end(), 1.0);
  } else if (const auto* b = std::get_if<Birth_rate_indicator>(&f)) {
    require_positive_time(t, "birth-rate indicator");
    for (auto k = std::size_t{0}; k < alive.size(); ++k) {
      const auto n = static_cast<double>(births_along(tree, alive[k], t));
      out[k] = std::abs(n / t - b->target) < b->epsilon ? 1.0 : 0.0;
    }
  } else if (const auto* o = std::get_if<Occupation_average>(&f)) {
    require_positive_time(t, "occupation average");
    ancestral_integrals(tree, alive, t, [o](State x) { return o->h[static_cast<std::size_t>(x)]; }, out);
    for (auto& v : out) v = o->apply_g(v / t);
  } else if (const auto* s = std::get_if<Terminal_speed_indicator>(&f)) {
    require_positive_time(t, "terminal speed indicator");
    const auto x0 = alive.empty() ? 0.0 : root_start(tree);
    for (auto k = std::size_t{0}; k < alive.size(); ++k) {
      const auto speed = (tree.path(alive[k]).value_at(t) - x0) / t;
      out[k] = std::abs(speed - s->speed) < s->epsilon ? 1.0 : 0.0;
    }
  }
}

auto eval_functional(const Additive_functional& f, const Tree& tree, Particle_index u, double t) -> double {
  require_alive(tree, u, t);
  if (std::holds_alternative<Unit_functional>(f)) return 1.0;
  if (const auto* b = std::get_if<Birth_rate_indicator>(&f)) {
    require_positive_time(t, "birth-rate indicator");
    const auto n = static_cast<double>(births_along(tree, u, t));
    return std::abs(n / t - b->target) < b->epsilon ? 1.0 : 0.0;
  }
  if (const auto* o = std::get_if<Occupation_average>(&f)) {
    require_positive_time(t, "occupation average");
    const auto path = ancestry_path(tree, u, t);
    const auto integral = path_integral(path.view(), [o](State x) { return o->h[static_cast<std::size_t>(x)]; }, t);
    return o->apply_g(integral / t);
  }
  const auto& s = std::get<Terminal_speed_indicator>(f);
  require_positive_time(t, "terminal speed indicator");
  const auto speed = (tree.path(u).value_at(t) - root_start(tree)) / t;
  return std::abs(speed - s.speed) < s.epsilon ? 1.0 : 0.0;
}

auto eval_functional(const Additive_functional& f, const Tree& tree, const Label& u, double t) -> double {
  tree.require_queryable(t);
  return eval_functional(f, tree, index_of(tree, u), t);
}

auto particle_weight(const Tree& tree, const Model_spec& spec, const Label& u, double t) -> double {
  tree.require_queryable(t);
  const auto path = ancestry_path(tree, index_of(tree, u), t);
  const auto excess = spec.branching_excess();
  const auto exponent = path_integral(path.view(), [&](State x) { return excess * spec.rate.at(x); }, t);
  return std::exp(-exponent + log_zeta(spec, path.view(), t));
}

auto additive_martingale(const Tree& tree, const Model_spec& spec, double t) -> double {
  return Population_snapshot{tree, spec, t}.z();
}

auto weighted_sum(const Tree& tree, const Model_spec& spec, const Additive_functional& f, double t) -> double {
  const auto snapshot = Population_snapshot{tree, spec, t};
  auto values = std::vector<double>{};
  functional_values(f, tree, snapshot, values);
  return snapshot.normalized(values);
}

auto spine_posterior(const Tree& tree, const Model_spec& spec, double t) -> std::vector<std::pair<Label, double>> {
  const auto snapshot = Population_snapshot{tree, spec, t};
  const auto probabilities = snapshot.posterior();
  auto out = std::vector<std::pair<Label, double>>{};
  out.reserve(probabilities.size());
  for (auto k = std::size_t{0}; k < probabilities.size(); ++k) {
    out.emplace_back(tree.label(snapshot.alive()[k]), probabilities[k]);
  }
  return out;
}

}  // namespace spinelaw
