#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinelaw/model.hpp"
#include "spinelaw/sim_p.hpp"
#include "spinelaw/sim_q.hpp"
#include "spinelaw/weights.hpp"

namespace spinelaw {

enum class Experiment_kind { birth_rate, occupation, bbm_tilt, mean_one, many_to_one, spine_posterior };

auto to_string(Experiment_kind kind) -> std::string_view;
auto parse_experiment_kind(std::string_view text) -> std::optional<Experiment_kind>;

// Statistic of a single particle used by the spine-posterior check.
struct Spine_tally {
  enum class Kind { births_at_most, state_equals };
  Kind kind = Kind::births_at_most;
  double threshold = 2.0;  // k for births_at_most, the state for state_equals

  auto eval(const Tree& tree, Particle_index u, double t) const -> double;
};

struct Experiment_config {
  Experiment_kind kind = Experiment_kind::birth_rate;
  Model_spec spec;
  Additive_functional functional = Unit_functional{};
  Spine_tally tally;
  std::vector<double> grid;
  Sim_caps caps;
  std::size_t reps = 10'000;
  std::uint64_t master_seed = 0;
  // bbm_tilt only: reps with Z(t) <= z_floor are left out of the normalized average.
  double z_floor = 0.0;
};

// Checks every precondition of the chosen experiment kind; throws Config errors.
// Returns the model's validation warnings.
auto validate_experiment(const Experiment_config& cfg) -> std::vector<std::string>;

// One replication at one grid time. For P-trees: population, Z, the normalized average
// (empty when extinct) and sum_u f_u w_u. See the README for the other experiment kinds.
struct Series_row {
  std::size_t rep = 0;
  double t = 0.0;
  std::optional<std::size_t> pop;
  std::optional<double> z;
  std::optional<double> star;
  bool extinct = false;
  bool truncated = false;
  std::optional<double> f_context;
};

struct Summary_row {
  double t = 0.0;
  std::string estimator;
  std::optional<double> mean;
  std::optional<double> se;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::optional<double> oracle;
  std::optional<double> z;
  std::size_t used_reps = 0;
  double trunc_rate = 0.0;
  double ext_rate = 0.0;
  // The oracle is an exact finite-t value and |z| must stay within the check limit.
  bool checked = false;
  // Fewer than two usable values, so no SE.
  bool insufficient = false;
};

struct Experiment_result {
  std::vector<Series_row> series;
  std::vector<Summary_row> summary;
  std::vector<std::string> warnings;
};

auto exp_birth_rate(const Experiment_config& cfg, unsigned threads = 1) -> Experiment_result;
auto exp_occupation(const Experiment_config& cfg, unsigned threads = 1) -> Experiment_result;
auto exp_bbm_tilt(const Experiment_config& cfg, unsigned threads = 1) -> Experiment_result;
auto check_mean_one(const Experiment_config& cfg, unsigned threads = 1) -> Experiment_result;
auto check_many_to_one(const Experiment_config& cfg, unsigned threads = 1) -> Experiment_result;
auto check_spine_posterior(const Experiment_config& cfg, unsigned threads = 1) -> Experiment_result;
// Dispatches on cfg.kind.
auto run_experiment(const Experiment_config& cfg, unsigned threads = 1) -> Experiment_result;

// Checked rows whose |z| exceeds z_max. A zero-SE row breaches when its mean differs from
// the oracle; rows without an SE are skipped.
auto breached_rows(const Experiment_result& result, double z_max = 4.0) -> std::vector<const Summary_row*>;

// Exact E_P[sum_u f_u(t) w_u(t)] = E[f(spine)] when a closed form is available.
auto exact_expectation(const Model_spec& spec, const Additive_functional& f, double t) -> std::optional<double>;
// Exact probability that the spine particle passes the tally at t, when available.
auto exact_tally(const Model_spec& spec, const Spine_tally& tally, double t) -> std::optional<double>;
// Large-t limit of the normalized average, when the experiment predicts one.
auto star_limit(const Experiment_config& cfg) -> std::optional<double>;

// f evaluated on a spine-only record.
auto eval_on_spine(const Additive_functional& f, const Spine_record& spine, double t) -> double;

// The grid a kind uses when the config gives none.
auto default_grid(const Model_spec& spec) -> std::vector<double>;

}  // namespace spinelaw
