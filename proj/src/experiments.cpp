#include "spinelaw/experiments.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "spinelaw/exact.hpp"
#include "spinelaw/parallel.hpp"
#include "spinelaw/stats.hpp"

namespace spinelaw {

namespace {

auto config_error(const std::string& message) -> Error { return Error{Error_kind::config, message}; }

auto kind_name(const Additive_functional& f) -> std::string_view {
  if (std::holds_alternative<Unit_functional>(f)) return "one";
  if (std::holds_alternative<Birth_rate_indicator>(f)) return "birth_rate";
  if (std::holds_alternative<Occupation_average>(f)) return "occupation";
  return "terminal_speed";
}

auto supercritical_tilt(const Model_spec& spec) -> bool {
  const auto lambda = spec.girsanov_lambda();
  if (lambda == 0.0) return false;
  const auto s = spec.sigma();
  return 0.5 * lambda * lambda * s * s >= spec.branching_excess() * spec.rate.bound();
}

auto observation_times(const std::vector<double>& grid) -> std::vector<double> {
  auto out = std::vector<double>{};
  for (const auto t : grid) {
    if (t > 0.0) out.push_back(t);
  }
  return out;
}

auto sim_caps(const Experiment_config& cfg) -> Sim_caps {
  auto caps = cfg.caps;
  caps.observation_times = observation_times(cfg.grid);
  return caps;
}

// Stationary mean of h for a finite-state motion.
auto stationary_mean(const Model_spec& spec, const std::vector<double>& h) -> std::optional<double> {
  if (std::holds_alternative<No_motion>(spec.motion.kind)) return h.at(0);
  if (const auto* chain = std::get_if<Two_state_chain>(&spec.motion.kind)) {
    const auto pi = exact::stationary_law(*chain);
    return h.at(0) * pi[0] + h.at(1) * pi[1];
  }
  return std::nullopt;
}

struct Counts {
  std::size_t truncated = 0;
  std::size_t extinct = 0;
};

auto make_row(double t, std::string estimator, const std::vector<double>& values, std::optional<double> oracle,
              bool exact_oracle, std::size_t reps, Counts counts) -> Summary_row {
  auto row = Summary_row{};
  row.t = t;
  row.estimator = std::move(estimator);
  row.oracle = oracle;
  row.used_reps = values.size();
  row.trunc_rate = reps == 0 ? 0.0 : static_cast<double>(counts.truncated) / static_cast<double>(reps);
  row.ext_rate = reps == 0 ? 0.0 : static_cast<double>(counts.extinct) / static_cast<double>(reps);
  row.checked = exact_oracle && oracle.has_value();
  if (values.size() >= 2) {
    const auto s = summarize(values, oracle);
    row.mean = s.mean;
    row.se = s.se;
    row.ci_lo = s.ci_lo;
    row.ci_hi = s.ci_hi;
    row.z = s.z;
  } else {
    row.insufficient = true;
    if (!values.empty()) row.mean = values.front();
  }
  return row;
}

// Difference of two independent estimates.
auto difference_row(double t, std::string estimator, const Summary_row& a, const Summary_row& b) -> Summary_row {
  auto row = Summary_row{};
  row.t = t;
  row.estimator = std::move(estimator);
  row.oracle = 0.0;
  row.used_reps = a.used_reps + b.used_reps;
  row.trunc_rate = a.trunc_rate;
  row.ext_rate = a.ext_rate;
  row.checked = true;
  if (a.mean && b.mean) row.mean = *a.mean - *b.mean;
  if (a.se && b.se) {
    const auto se = std::sqrt(*a.se * *a.se + *b.se * *b.se);
    row.se = se;
    row.ci_lo = *row.mean - 1.96 * se;
    row.ci_hi = *row.mean + 1.96 * se;
    if (se > 0.0) {
      row.z = *row.mean / se;
    } else if (*row.mean == 0.0) {
      row.z = 0.0;
    }
  } else {
    row.insufficient = true;
  }
  return row;
}

struct P_scratch {
  Tree tree;
  Population_snapshot snapshot;
  std::vector<double> values;
};

// Simulates cfg.reps P-trees and fills one series row per (rep, grid time), rep-major.
void simulate_p_series(const Experiment_config& cfg, unsigned threads, bool with_functional, std::size_t rep_offset,
                       std::vector<Series_row>& series) {
  const auto caps = sim_caps(cfg);
  const auto g = cfg.grid.size();
  const auto base = series.size();
  series.resize(base + cfg.reps * g);
  auto workers = std::vector<P_scratch>(std::max(1u, threads));
  parallel_for(cfg.reps, threads, [&](unsigned worker, std::size_t rep) {
    auto& s = workers[worker];
    simulate_tree(cfg.spec, caps, Rng_handle{cfg.master_seed, rep, Stream_purpose::p_tree}, s.tree);
    for (auto k = std::size_t{0}; k < g; ++k) {
      auto& row = series[base + rep * g + k];
      row.rep = rep_offset + rep;
      row.t = cfg.grid[k];
      if (s.tree.truncated()) {
        row.truncated = true;
        continue;
      }
      s.snapshot.assign(s.tree, cfg.spec, row.t);
      row.pop = s.snapshot.population();
      row.z = s.snapshot.z();
      row.extinct = s.snapshot.extinct();
      if (!with_functional) continue;
      if (row.extinct) {
        row.f_context = 0.0;
        continue;
      }
      functional_values(cfg.functional, s.tree, s.snapshot, s.values);
      row.f_context = s.snapshot.weighted_total(s.values);
      if (*row.z > cfg.z_floor) row.star = s.snapshot.normalized(s.values);
    }
  });
}

auto counts_at(const std::vector<Series_row>& series, std::size_t g, std::size_t k, std::size_t reps) -> Counts {
  auto c = Counts{};
  for (auto rep = std::size_t{0}; rep < reps; ++rep) {
    const auto& row = series[rep * g + k];
    c.truncated += row.truncated ? 1 : 0;
    c.extinct += row.extinct ? 1 : 0;
  }
  return c;
}

template <typename Pick>
auto collect(const std::vector<Series_row>& series, std::size_t offset, std::size_t g, std::size_t k,
             std::size_t reps, Pick pick) -> std::vector<double> {
  auto out = std::vector<double>{};
  out.reserve(reps);
  for (auto rep = std::size_t{0}; rep < reps; ++rep) {
    if (const auto v = pick(series[offset + rep * g + k])) out.push_back(*v);
  }
  return out;
}

auto pick_z(const Series_row& r) -> std::optional<double> { return r.z; }
auto pick_star(const Series_row& r) -> std::optional<double> { return r.star; }
auto pick_context(const Series_row& r) -> std::optional<double> { return r.f_context; }

// Shared driver for the P-tree experiments: star, weighted_sum and Z rows per grid time.
auto functional_experiment(const Experiment_config& cfg, unsigned threads) -> Experiment_result {
  auto result = Experiment_result{};
  result.warnings = validate_experiment(cfg);
  simulate_p_series(cfg, threads, true, 0, result.series);
  const auto g = cfg.grid.size();
  const auto tilt_checks = !supercritical_tilt(cfg.spec);
  const auto limit = star_limit(cfg);
  for (auto k = std::size_t{0}; k < g; ++k) {
    const auto t = cfg.grid[k];
    const auto counts = counts_at(result.series, g, k, cfg.reps);
    result.summary.push_back(
        make_row(t, "star", collect(result.series, 0, g, k, cfg.reps, pick_star), limit, false, cfg.reps, counts));
    result.summary.push_back(make_row(t, "weighted_sum", collect(result.series, 0, g, k, cfg.reps, pick_context),
                                      exact_expectation(cfg.spec, cfg.functional, t), tilt_checks, cfg.reps, counts));
    result.summary.push_back(
        make_row(t, "Z", collect(result.series, 0, g, k, cfg.reps, pick_z), 1.0, tilt_checks, cfg.reps, counts));
  }
  return result;
}

void require_functional(const Experiment_config& cfg, std::string_view wanted) {
  if (kind_name(cfg.functional) != wanted) {
    throw config_error(fmt::format("functional.kind: {} experiments need the {} functional, got {}",
                                   to_string(cfg.kind), wanted, kind_name(cfg.functional)));
  }
}

void require_unit_zeta(const Experiment_config& cfg) {
  if (!std::holds_alternative<Unit_weight>(cfg.spec.zeta)) {
    throw config_error(fmt::format("model.zeta: {} experiments need zeta = one", to_string(cfg.kind)));
  }
}

}  // namespace

auto to_string(Experiment_kind kind) -> std::string_view {
  switch (kind) {
    case Experiment_kind::birth_rate: return "birth_rate";
    case Experiment_kind::occupation: return "occupation";
    case Experiment_kind::bbm_tilt: return "bbm_tilt";
    case Experiment_kind::mean_one: return "mean_one";
    case Experiment_kind::many_to_one: return "many_to_one";
    case Experiment_kind::spine_posterior: return "spine_posterior";
  }
  return "?";
}

auto parse_experiment_kind(std::string_view text) -> std::optional<Experiment_kind> {
  for (const auto k : {Experiment_kind::birth_rate, Experiment_kind::occupation, Experiment_kind::bbm_tilt,
                       Experiment_kind::mean_one, Experiment_kind::many_to_one, Experiment_kind::spine_posterior}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

auto Spine_tally::eval(const Tree& tree, Particle_index u, double t) const -> double {
  switch (kind) {
    case Kind::births_at_most: return static_cast<double>(births_along(tree, u, t)) <= threshold ? 1.0 : 0.0;
    case Kind::state_equals:
      require_alive(tree, u, t);
      return tree.path(u).value_at(t) == threshold ? 1.0 : 0.0;
  }
  return 0.0;
}

auto default_grid(const Model_spec& spec) -> std::vector<double> {
  if (spec.motion.is_chain()) return {4.0, 8.0, 16.0};
  return {2.0, 4.0, 8.0, 12.0};
}

auto validate_experiment(const Experiment_config& cfg) -> std::vector<std::string> {
  auto report = validate_spec(cfg.spec);
  if (!report.ok()) {
    auto message = std::string{"invalid model"};
    for (const auto& e : report.errors) message += "; " + e;
    throw config_error(message);
  }
  if (cfg.reps < 1) throw config_error("experiment.reps: must be >= 1");
  if (cfg.grid.empty()) throw config_error("experiment.grid: must list at least one time");
  for (auto k = std::size_t{0}; k < cfg.grid.size(); ++k) {
    const auto t = cfg.grid[k];
    if (!(t >= 0.0) || t > cfg.caps.horizon) {
      throw config_error(fmt::format("experiment.grid: {} outside [0, caps.horizon={}]", t, cfg.caps.horizon));
    }
    if (k > 0 && !(t > cfg.grid[k - 1])) throw config_error("experiment.grid: times must be strictly increasing");
  }
  const auto needs_positive_t = !std::holds_alternative<Unit_functional>(cfg.functional) ||
                                cfg.kind == Experiment_kind::spine_posterior;
  if (needs_positive_t && cfg.grid.front() <= 0.0 && cfg.kind != Experiment_kind::mean_one) {
    throw config_error("experiment.grid: this experiment needs t > 0");
  }

  switch (cfg.kind) {
    case Experiment_kind::birth_rate: {
      if (!std::holds_alternative<No_motion>(cfg.spec.motion.kind)) {
        throw config_error("model.motion: birth_rate experiments need motion = none");
      }
      if (!cfg.spec.rate.is_constant()) throw config_error("model.rate: birth_rate experiments need a constant rate");
      require_unit_zeta(cfg);
      require_functional(cfg, "birth_rate");
      const auto target = std::get<Birth_rate_indicator>(cfg.functional).target;
      const auto rate = cfg.spec.mean_offspring() * cfg.spec.rate.bound();
      if (std::abs(target - rate) > 1e-12 * std::max(1.0, rate)) {
        throw config_error(fmt::format("functional.target: must equal m*beta = {}", rate));
      }
      break;
    }
    case Experiment_kind::occupation:
      if (!cfg.spec.motion.is_chain()) throw config_error("model.motion: occupation experiments need two_state motion");
      require_unit_zeta(cfg);
      require_functional(cfg, "occupation");
      break;
    case Experiment_kind::bbm_tilt:
      if (!cfg.spec.motion.is_brownian()) throw config_error("model.motion: bbm_tilt experiments need brownian motion");
      if (!std::holds_alternative<Girsanov_weight>(cfg.spec.zeta)) {
        throw config_error("model.zeta: bbm_tilt experiments need a girsanov weight");
      }
      require_functional(cfg, "terminal_speed");
      break;
    case Experiment_kind::mean_one:
      break;
    case Experiment_kind::many_to_one:
    case Experiment_kind::spine_posterior:
      if (cfg.kind == Experiment_kind::spine_posterior && cfg.tally.kind == Spine_tally::Kind::state_equals &&
          cfg.spec.motion.state_count() == 0) {
        throw config_error("experiment.tally: state_eq needs a finite-state motion");
      }
      break;
  }
  try {
    validate_caps(cfg.caps);
    validate_functional(cfg.functional, cfg.spec);
  } catch (const Error& e) {
    // Drop the original kind prefix; the message already names the key.
    const auto message = std::string_view{e.what()};
    throw config_error(std::string{message.substr(to_string(e.kind()).size() + 2)});
  }
  if (!(cfg.z_floor >= 0.0)) throw config_error("experiment.z_floor: must be >= 0");
  return report.warnings;
}

auto exact_expectation(const Model_spec& spec, const Additive_functional& f, double t) -> std::optional<double> {
  if (std::holds_alternative<Unit_functional>(f)) return 1.0;
  if (!(t > 0.0)) return std::nullopt;
  if (const auto* b = std::get_if<Birth_rate_indicator>(&f)) {
    if (!spec.rate.is_constant()) return std::nullopt;
    const auto rate = spec.mean_offspring() * spec.rate.bound();
    return exact::poisson_window_probability(rate * t, t, b->target, b->epsilon);
  }
  if (const auto* o = std::get_if<Occupation_average>(&f)) {
    if (o->g != Occupation_map::identity) return std::nullopt;
    if (std::holds_alternative<No_motion>(spec.motion.kind)) return o->h.at(0);
    const auto* chain = std::get_if<Two_state_chain>(&spec.motion.kind);
    if (!chain) return std::nullopt;
    const auto start = static_cast<int>(spec.motion.start);
    return o->h.at(0) + (o->h.at(1) - o->h.at(0)) * exact::chain_occupation_mean(*chain, start, t);
  }
  const auto& s = std::get<Terminal_speed_indicator>(f);
  if (!spec.motion.is_brownian()) return std::nullopt;
  return exact::gaussian_window_probability(spec.spine_drift(), spec.sigma(), t, s.speed, s.epsilon);
}

auto exact_tally(const Model_spec& spec, const Spine_tally& tally, double t) -> std::optional<double> {
  if (!(t > 0.0)) return std::nullopt;
  if (tally.kind == Spine_tally::Kind::births_at_most) {
    if (!spec.rate.is_constant()) return std::nullopt;
    if (tally.threshold < 0.0) return 0.0;
    const auto rate = spec.mean_offspring() * spec.rate.bound();
    return exact::poisson_cdf(rate * t, static_cast<std::size_t>(std::floor(tally.threshold)));
  }
  if (std::holds_alternative<No_motion>(spec.motion.kind)) return tally.threshold == 0.0 ? 1.0 : 0.0;
  const auto* chain = std::get_if<Two_state_chain>(&spec.motion.kind);
  if (!chain) return std::nullopt;
  const auto p1 = exact::chain_state_one_probability(*chain, static_cast<int>(spec.motion.start), t);
  if (tally.threshold == 1.0) return p1;
  if (tally.threshold == 0.0) return 1.0 - p1;
  return 0.0;
}

auto star_limit(const Experiment_config& cfg) -> std::optional<double> {
  switch (cfg.kind) {
    case Experiment_kind::birth_rate:
    case Experiment_kind::bbm_tilt:
      return 1.0;
    case Experiment_kind::occupation: {
      const auto& o = std::get<Occupation_average>(cfg.functional);
      const auto l = stationary_mean(cfg.spec, o.h);
      if (!l) return std::nullopt;
      return o.apply_g(*l);
    }
    default:
      return std::nullopt;
  }
}

auto eval_on_spine(const Additive_functional& f, const Spine_record& spine, double t) -> double {
  if (std::holds_alternative<Unit_functional>(f)) return 1.0;
  if (!(t > 0.0) || t > spine.horizon) {
    throw Error{Error_kind::query_out_of_range, fmt::format("t={} outside (0, {}]", t, spine.horizon)};
  }
  if (const auto* b = std::get_if<Birth_rate_indicator>(&f)) {
    const auto n = static_cast<double>(spine.branches_before(t));
    return std::abs(n / t - b->target) < b->epsilon ? 1.0 : 0.0;
  }
  const auto path = spine.spine_path.view();
  if (const auto* o = std::get_if<Occupation_average>(&f)) {
    const auto integral = path_integral(path, [o](State x) { return o->h[static_cast<std::size_t>(x)]; }, t);
    return o->apply_g(integral / t);
  }
  const auto& s = std::get<Terminal_speed_indicator>(f);
  const auto speed = (path.value_at(t) - path.start_value()) / t;
  return std::abs(speed - s.speed) < s.epsilon ? 1.0 : 0.0;
}

auto exp_birth_rate(const Experiment_config& cfg, unsigned threads) -> Experiment_result {
  if (cfg.kind != Experiment_kind::birth_rate) throw config_error("experiment.kind: expected birth_rate");
  return functional_experiment(cfg, threads);
}

auto exp_occupation(const Experiment_config& cfg, unsigned threads) -> Experiment_result {
  if (cfg.kind != Experiment_kind::occupation) throw config_error("experiment.kind: expected occupation");
  return functional_experiment(cfg, threads);
}

auto exp_bbm_tilt(const Experiment_config& cfg, unsigned threads) -> Experiment_result {
  if (cfg.kind != Experiment_kind::bbm_tilt) throw config_error("experiment.kind: expected bbm_tilt");
  auto result = functional_experiment(cfg, threads);
  if (supercritical_tilt(cfg.spec)) {
    result.warnings.push_back("supercritical tilt: Z(t) is expected to decay to 0; oracle rows are reported unchecked");
  }
  return result;
}

auto check_mean_one(const Experiment_config& cfg, unsigned threads) -> Experiment_result {
  auto result = Experiment_result{};
  result.warnings = validate_experiment(cfg);
  simulate_p_series(cfg, threads, false, 0, result.series);
  const auto g = cfg.grid.size();
  const auto checks = !supercritical_tilt(cfg.spec);
  for (auto k = std::size_t{0}; k < g; ++k) {
    const auto counts = counts_at(result.series, g, k, cfg.reps);
    result.summary.push_back(make_row(cfg.grid[k], "Z", collect(result.series, 0, g, k, cfg.reps, pick_z), 1.0, checks,
                                      cfg.reps, counts));
  }
  return result;
}

auto check_many_to_one(const Experiment_config& cfg, unsigned threads) -> Experiment_result {
  auto result = Experiment_result{};
  result.warnings = validate_experiment(cfg);
  simulate_p_series(cfg, threads, true, 0, result.series);
  const auto g = cfg.grid.size();
  const auto p_rows = result.series.size();

  // Spine-only replications, numbered after the P replications.
  const auto horizon = cfg.caps.horizon;
  const auto obs = observation_times(cfg.grid);
  result.series.resize(p_rows + cfg.reps * g);
  parallel_for(cfg.reps, threads, [&](unsigned, std::size_t rep) {
    const auto spine = simulate_spine_only(cfg.spec, horizon, Rng_handle{cfg.master_seed, rep, Stream_purpose::q_spine}, obs);
    for (auto k = std::size_t{0}; k < g; ++k) {
      auto& row = result.series[p_rows + rep * g + k];
      row.rep = cfg.reps + rep;
      row.t = cfg.grid[k];
      row.f_context = row.t > 0.0 || std::holds_alternative<Unit_functional>(cfg.functional)
                          ? std::optional<double>{eval_on_spine(cfg.functional, spine, row.t)}
                          : std::nullopt;
    }
  });

  const auto checks = !supercritical_tilt(cfg.spec);
  for (auto k = std::size_t{0}; k < g; ++k) {
    const auto t = cfg.grid[k];
    const auto oracle = exact_expectation(cfg.spec, cfg.functional, t);
    const auto counts = counts_at(result.series, g, k, cfg.reps);
    auto a = make_row(t, "weighted_sum", collect(result.series, 0, g, k, cfg.reps, pick_context), oracle, checks,
                      cfg.reps, counts);
    auto b = make_row(t, "spine", collect(result.series, p_rows, g, k, cfg.reps, pick_context), oracle, true, cfg.reps,
                      Counts{});
    auto diff = difference_row(t, "A_minus_B", a, b);
    diff.checked = checks;
    result.summary.push_back(std::move(a));
    result.summary.push_back(std::move(b));
    result.summary.push_back(std::move(diff));
  }
  return result;
}

auto check_spine_posterior(const Experiment_config& cfg, unsigned threads) -> Experiment_result {
  auto result = Experiment_result{};
  result.warnings = validate_experiment(cfg);
  const auto caps = sim_caps(cfg);
  const auto g = cfg.grid.size();
  result.series.resize(cfg.reps * g);
  struct Scratch {
    Q_tree q;
    Population_snapshot snapshot;
  };
  auto workers = std::vector<Scratch>(std::max(1u, threads));
  parallel_for(cfg.reps, threads, [&](unsigned worker, std::size_t rep) {
    auto& s = workers[worker];
    simulate_q_tree(cfg.spec, caps, Rng_handle{cfg.master_seed, rep, Stream_purpose::q_spine}, s.q);
    for (auto k = std::size_t{0}; k < g; ++k) {
      auto& row = result.series[rep * g + k];
      row.rep = rep;
      row.t = cfg.grid[k];
      if (s.q.tree.truncated()) {
        row.truncated = true;
        continue;
      }
      s.snapshot.assign(s.q.tree, cfg.spec, row.t);
      row.pop = s.snapshot.population();
      row.z = s.snapshot.z();
      row.extinct = s.snapshot.extinct();
      if (row.extinct) continue;
      const auto posterior = s.snapshot.posterior();
      const auto alive = s.snapshot.alive();
      auto total = 0.0;
      for (auto j = std::size_t{0}; j < alive.size(); ++j) {
        total += posterior[j] * cfg.tally.eval(s.q.tree, alive[j], row.t);
      }
      row.star = total;
      row.f_context = cfg.tally.eval(s.q.tree, s.q.spine_particle_at(row.t), row.t);
    }
  });

  for (auto k = std::size_t{0}; k < g; ++k) {
    const auto t = cfg.grid[k];
    const auto counts = counts_at(result.series, g, k, cfg.reps);
    const auto oracle = exact_tally(cfg.spec, cfg.tally, t);
    result.summary.push_back(make_row(t, "direct", collect(result.series, 0, g, k, cfg.reps, pick_context), oracle,
                                      true, cfg.reps, counts));
    result.summary.push_back(make_row(t, "posterior", collect(result.series, 0, g, k, cfg.reps, pick_star), oracle,
                                      true, cfg.reps, counts));
    auto differences = std::vector<double>{};
    for (auto rep = std::size_t{0}; rep < cfg.reps; ++rep) {
      const auto& row = result.series[rep * g + k];
      if (row.f_context && row.star) differences.push_back(*row.f_context - *row.star);
    }
    result.summary.push_back(make_row(t, "direct_minus_posterior", differences, 0.0, true, cfg.reps, counts));
  }
  return result;
}

auto run_experiment(const Experiment_config& cfg, unsigned threads) -> Experiment_result {
  switch (cfg.kind) {
    case Experiment_kind::birth_rate: return exp_birth_rate(cfg, threads);
    case Experiment_kind::occupation: return exp_occupation(cfg, threads);
    case Experiment_kind::bbm_tilt: return exp_bbm_tilt(cfg, threads);
    case Experiment_kind::mean_one: return check_mean_one(cfg, threads);
    case Experiment_kind::many_to_one: return check_many_to_one(cfg, threads);
    case Experiment_kind::spine_posterior: return check_spine_posterior(cfg, threads);
  }
  throw config_error("experiment.kind: unknown");
}

auto breached_rows(const Experiment_result& result, double z_max) -> std::vector<const Summary_row*> {
  auto out = std::vector<const Summary_row*>{};
  for (const auto& row : result.summary) {
    if (!row.checked || row.insufficient || !row.mean || !row.oracle) continue;
    const auto breach = row.z ? std::abs(*row.z) > z_max : *row.mean != *row.oracle;
    if (breach) out.push_back(&row);
  }
  return out;
}

}  // namespace spinelaw
