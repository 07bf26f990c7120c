#include "spinelaw/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace spinelaw {

namespace {

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

auto neumaier_sum(const std::vector<double>& xs, auto&& term) -> double {
  auto sum = 0.0;
  auto c = 0.0;
  for (auto k = std::size_t{0}; k < xs.size(); ++k) {
    const auto x = term(k, xs[k]);
    const auto t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

// Truncates an infinite pmf at k_truncation, folding the tail into the last atom.
auto truncate_with_tail(std::vector<double> pmf, double mass_below, const char* family) -> std::vector<double> {
  const auto tail = 1.0 - mass_below;
  if (tail > Offspring_law::k_tail_fold_limit) {
    throw Error{Error_kind::invalid_model,
                fmt::format("offspring: {} tail mass {} beyond k={} does not converge", family, tail,
                            Offspring_law::k_truncation)};
  }
  if (tail > 0) pmf.back() += tail;
  return pmf;
}

}  // namespace

auto Motion_model::state_count() const -> std::size_t {
  return std::visit(Overloaded{[](const No_motion&) -> std::size_t { return 1; },
                               [](const Two_state_chain&) -> std::size_t { return 2; },
                               [](const Brownian_motion&) -> std::size_t { return 0; }},
                    kind);
}

auto Rate_function::at(State x) const -> double {
  return std::visit(Overloaded{[](const Constant_rate& r) { return r.beta; },
                               [x](const State_rate_table& r) { return r.by_state[static_cast<std::size_t>(x)]; }},
                    kind_);
}

auto Rate_function::bound() const -> double {
  return std::visit(Overloaded{[](const Constant_rate& r) { return r.beta; },
                               [](const State_rate_table& r) {
                                 return r.by_state.empty() ? 0.0 : *std::max_element(r.by_state.begin(), r.by_state.end());
                               }},
                    kind_);
}

Offspring_law::Offspring_law(Offspring_kind kind, double parameter, std::vector<double> pmf)
    : kind_{kind}, parameter_{parameter}, pmf_{std::move(pmf)} {
  if (pmf_.empty()) {
    throw Error{Error_kind::invalid_model, "offspring: empty pmf"};
  }
  for (auto k = std::size_t{0}; k < pmf_.size(); ++k) {
    if (!(pmf_[k] >= 0.0) || !std::isfinite(pmf_[k])) {
      throw Error{Error_kind::invalid_model, fmt::format("offspring.pmf[{}]: probability {} is not in [0, 1]", k, pmf_[k])};
    }
  }
  while (pmf_.size() > 1 && pmf_.back() == 0.0) pmf_.pop_back();
  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
  const auto total = cdf_.back();
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error{Error_kind::invalid_model, fmt::format("offspring.pmf: probabilities sum to {}, not 1", total)};
  }
  cdf_.back() = 1.0;
}

auto Offspring_law::deterministic(std::size_t k) -> Offspring_law {
  auto pmf = std::vector<double>(k + 1, 0.0);
  pmf[k] = 1.0;
  return {Offspring_kind::deterministic, static_cast<double>(k), std::move(pmf)};
}

auto Offspring_law::two_point(double p0) -> Offspring_law {
  if (!(p0 >= 0.0 && p0 <= 1.0)) {
    throw Error{Error_kind::invalid_model, fmt::format("offspring.p0: {} is not in [0, 1]", p0)};
  }
  return {Offspring_kind::two_point, p0, {p0, 0.0, 1.0 - p0}};
}

auto Offspring_law::geometric(double p) -> Offspring_law {
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error{Error_kind::invalid_model, fmt::format("offspring.p: {} is not in (0, 1]", p)};
  }
  auto pmf = std::vector<double>(k_truncation + 1);
  auto mass = 0.0;
  for (auto k = std::size_t{0}; k <= k_truncation; ++k) {
    pmf[k] = std::pow(1.0 - p, static_cast<double>(k)) * p;
    mass += pmf[k];
  }
  return {Offspring_kind::geometric, p, truncate_with_tail(std::move(pmf), mass, "geometric")};
}

auto Offspring_law::poisson(double mu) -> Offspring_law {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw Error{Error_kind::invalid_model, fmt::format("offspring.mu: {} is not a finite non-negative mean", mu)};
  }
  auto pmf = std::vector<double>(k_truncation + 1);
  auto mass = 0.0;
  for (auto k = std::size_t{0}; k <= k_truncation; ++k) {
    const auto kd = static_cast<double>(k);
    pmf[k] = mu == 0.0 ? (k == 0 ? 1.0 : 0.0) : std::exp(-mu + kd * std::log(mu) - std::lgamma(kd + 1.0));
    mass += pmf[k];
  }
  return {Offspring_kind::poisson, mu, truncate_with_tail(std::move(pmf), mass, "poisson")};
}

auto Offspring_law::tabulated(std::vector<double> pmf) -> Offspring_law {
  return {Offspring_kind::tabulated, 0.0, std::move(pmf)};
}

auto Offspring_law::is_point_mass() const -> bool {
  return std::count_if(pmf_.begin(), pmf_.end(), [](double p) { return p > 0.0; }) == 1;
}

auto Offspring_law::sample(Rng& rng) const -> std::uint32_t {
  const auto u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto k = static_cast<std::size_t>(it - cdf_.begin());
  return static_cast<std::uint32_t>(std::min(k, pmf_.size() - 1));
}

auto offspring_mean(const Offspring_law& law) -> double {
  const auto m = neumaier_sum(law.pmf(), [](std::size_t k, double p) { return static_cast<double>(k) * p; });
  if (!std::isfinite(m)) {
    throw Error{Error_kind::invalid_model, "offspring: mean diverges"};
  }
  return m;
}

auto size_bias(const Offspring_law& law) -> Offspring_law {
  const auto m = offspring_mean(law);
  if (!(m > 0.0)) {
    throw Error{Error_kind::invalid_model, "offspring: size-biasing needs a positive mean"};
  }
  auto pmf = std::vector<double>(law.pmf().size());
  for (auto k = std::size_t{0}; k < pmf.size(); ++k) {
    pmf[k] = static_cast<double>(k) * law.pmf()[k] / m;
  }
  if (law.is_point_mass()) {
    return Offspring_law::deterministic(law.max_count());
  }
  return Offspring_law::tabulated(std::move(pmf));
}

auto Model_spec::girsanov_lambda() const -> double {
  if (const auto* g = std::get_if<Girsanov_weight>(&zeta)) return g->lambda;
  return 0.0;
}

auto Model_spec::sigma() const -> double {
  if (const auto* bm = std::get_if<Brownian_motion>(&motion.kind)) return bm->sigma;
  return 0.0;
}

auto Model_spec::spine_drift() const -> double {
  const auto s = sigma();
  return girsanov_lambda() * s * s;
}

auto validate_spec(const Model_spec& spec) -> Validation_report {
  auto report = Validation_report{};
  auto error = [&](std::string field, std::string message) {
    report.errors.push_back(fmt::format("{}: {}", field, message));
  };

  std::visit(Overloaded{[](const No_motion&) {},
                        [&](const Two_state_chain& c) {
                          if (!(c.q01 > 0.0) || !std::isfinite(c.q01)) error("model.motion.q01", "rate must be > 0");
                          if (!(c.q10 > 0.0) || !std::isfinite(c.q10)) error("model.motion.q10", "rate must be > 0");
                        },
                        [&](const Brownian_motion& b) {
                          if (!(b.sigma > 0.0) || !std::isfinite(b.sigma)) error("model.motion.sigma", "must be > 0");
                        }},
             spec.motion.kind);
  if (!(spec.motion.path_step > 0.0) || !std::isfinite(spec.motion.path_step)) {
    error("model.path_step", "must be > 0");
  }
  if (!std::isfinite(spec.motion.start)) {
    error("model.start", "must be finite");
  } else if (const auto states = spec.motion.state_count(); states > 0) {
    const auto s = spec.motion.start;
    if (s != std::floor(s) || s < 0 || s >= static_cast<double>(states)) {
      error("model.start", fmt::format("state index must lie in {{0,...,{}}}", states - 1));
    }
  }

  std::visit(Overloaded{[&](const Constant_rate& r) {
                          if (!(r.beta >= 0.0) || !std::isfinite(r.beta)) error("model.rate.beta", "rate must be >= 0");
                        },
                        [&](const State_rate_table& r) {
                          const auto states = spec.motion.state_count();
                          if (states == 0) {
                            error("model.rate", "state rate table needs a finite-state motion");
                          } else if (r.by_state.size() != states) {
                            error("model.rate", fmt::format("table has {} entries, motion has {} states", r.by_state.size(), states));
                          }
                          for (auto i = std::size_t{0}; i < r.by_state.size(); ++i) {
                            if (!(r.by_state[i] >= 0.0) || !std::isfinite(r.by_state[i])) {
                              error(fmt::format("model.rate[{}]", i), "rate must be >= 0");
                            }
                          }
                        }},
             spec.rate.kind());

  auto m = 0.0;
  try {
    m = offspring_mean(spec.offspring);
  } catch (const Error& e) {
    error("model.offspring", e.what());
  }

  if (const auto* g = std::get_if<Girsanov_weight>(&spec.zeta)) {
    if (!spec.motion.is_brownian()) {
      error("model.zeta", "girsanov weight requires Brownian motion");
    } else if (!std::isfinite(g->lambda)) {
      error("model.zeta.lambda", "must be finite");
    } else if (spec.rate.is_constant() && report.errors.empty()) {
      const auto beta = spec.rate.bound();
      const auto sigma = spec.sigma();
      const auto tilt = 0.5 * g->lambda * g->lambda * sigma * sigma;
      if (tilt >= (m - 1.0) * beta) {
        report.warnings.push_back(fmt::format(
            "model.zeta: lambda^2 sigma^2 / 2 = {} >= (m - 1) beta = {}; Z(t) -> 0 is expected", tilt, (m - 1.0) * beta));
      }
    }
  }
  return report;
}

auto require_valid(const Model_spec& spec) -> std::vector<std::string> {
  auto report = validate_spec(spec);
  if (!report.ok()) {
    auto message = std::string{"invalid model"};
    for (const auto& e : report.errors) message += "; " + e;
    throw Error{Error_kind::invalid_model, message};
  }
  return std::move(report.warnings);
}

auto log_zeta(const Model_spec& spec, Path_view path, double t) -> double {
  if (path.times.empty() || !path.covers(t)) {
    throw Error{Error_kind::path_domain, fmt::format("zeta: path does not cover t={}", t)};
  }
  const auto lambda = spec.girsanov_lambda();
  if (std::holds_alternative<Unit_weight>(spec.zeta) || lambda == 0.0) return 0.0;
  const auto sigma = spec.sigma();
  const auto elapsed = t - path.start();
  return lambda * (path.value_at(t) - path.start_value()) - 0.5 * lambda * lambda * sigma * sigma * elapsed;
}

auto zeta_eval(const Model_spec& spec, Path_view path, double t) -> double {
  return std::exp(log_zeta(spec, path, t));
}

auto describe(const Model_spec& spec) -> std::string {
  auto motion = std::visit(Overloaded{[](const No_motion&) { return std::string{"none"}; },
                                      [](const Two_state_chain& c) { return fmt::format("two_state(q01={}, q10={})", c.q01, c.q10); },
                                      [](const Brownian_motion& b) { return fmt::format("brownian(sigma={})", b.sigma); }},
                           spec.motion.kind);
  auto rate = std::visit(Overloaded{[](const Constant_rate& r) { return fmt::format("constant(beta={})", r.beta); },
                                    [](const State_rate_table& r) { return fmt::format("table({})", fmt::join(r.by_state, ",")); }},
                         spec.rate.kind());
  auto zeta = std::visit(Overloaded{[](const Unit_weight&) { return std::string{"one"}; },
                                    [](const Girsanov_weight& g) { return fmt::format("girsanov(lambda={})", g.lambda); }},
                         spec.zeta);
  return fmt::format("motion={} rate={} offspring_mean={} zeta={}", motion, rate, offspring_mean(spec.offspring), zeta);
}

}  // namespace spinelaw
