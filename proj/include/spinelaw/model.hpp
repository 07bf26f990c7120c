#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "spinelaw/error.hpp"
#include "spinelaw/path.hpp"
#include "spinelaw/rng.hpp"

namespace spinelaw {

// ---------------------------------------------------------------------------
// Motion

struct No_motion {};

struct Two_state_chain {
  double q01 = 1.0;  // rate 0 -> 1, per unit time
  double q10 = 1.0;  // rate 1 -> 0, per unit time
};

// X(t) = x0 + sigma * B(t).
struct Brownian_motion {
  double sigma = 1.0;
};

using Motion_kind = std::variant<No_motion, Two_state_chain, Brownian_motion>;

struct Motion_model {
  Motion_kind kind = No_motion{};
  State start = 0.0;
  double path_step = 0.01;  // grid step h for diffusion paths

  auto is_chain() const -> bool { return std::holds_alternative<Two_state_chain>(kind); }
  auto is_brownian() const -> bool { return std::holds_alternative<Brownian_motion>(kind); }
  // Number of discrete states; 0 for continuous state space.
  auto state_count() const -> std::size_t;
  auto path_kind() const -> Path_kind {
    return is_brownian() ? Path_kind::sampled : Path_kind::piecewise_constant;
  }
};

// ---------------------------------------------------------------------------
// Branching rate R

struct Constant_rate {
  double beta = 1.0;
};

struct State_rate_table {
  std::vector<double> by_state;
};

class Rate_function {
 public:
  Rate_function() = default;
  Rate_function(Constant_rate rate) : kind_{rate} {}
  Rate_function(State_rate_table table) : kind_{std::move(table)} {}

  auto at(State x) const -> double;
  // R_max, an upper bound on R over the state space.
  auto bound() const -> double;
  auto is_constant() const -> bool { return std::holds_alternative<Constant_rate>(kind_); }
  auto kind() const -> const std::variant<Constant_rate, State_rate_table>& { return kind_; }

 private:
  std::variant<Constant_rate, State_rate_table> kind_ = Constant_rate{};
};

// ---------------------------------------------------------------------------
// Offspring law A. State-independent in every shipped model.

enum class Offspring_kind { deterministic, two_point, geometric, poisson, tabulated };

class Offspring_law {
 public:
  static constexpr std::size_t k_truncation = 200;
  static constexpr double k_tail_fold_limit = 1e-14;

  static auto deterministic(std::size_t k) -> Offspring_law;
  // Mass p0 at 0 and 1 - p0 at 2.
  static auto two_point(double p0) -> Offspring_law;
  // P(A = k) = (1 - p)^k p, k >= 0.
  static auto geometric(double p) -> Offspring_law;
  static auto poisson(double mu) -> Offspring_law;
  static auto tabulated(std::vector<double> pmf) -> Offspring_law;

  auto kind() const -> Offspring_kind { return kind_; }
  // Parameter of the named family (k, p0, p or mu); unused for tabulated laws.
  auto parameter() const -> double { return parameter_; }
  auto pmf() const -> const std::vector<double>& { return pmf_; }
  auto probability(std::size_t k) const -> double { return k < pmf_.size() ? pmf_[k] : 0.0; }
  auto max_count() const -> std::size_t { return pmf_.size() - 1; }
  auto is_point_mass() const -> bool;

  // Inverse-CDF draw; consumes exactly one uniform.
  auto sample(Rng& rng) const -> std::uint32_t;

 private:
  Offspring_law(Offspring_kind kind, double parameter, std::vector<double> pmf);

  Offspring_kind kind_ = Offspring_kind::deterministic;
  double parameter_ = 0.0;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

// m = E[A] = sum k pmf(k); the branching excess M = m - 1 is always derived from it.
auto offspring_mean(const Offspring_law& law) -> double;
// pmf'(k) = k pmf(k) / m. Throws Invalid_model when m = 0.
auto size_bias(const Offspring_law& law) -> Offspring_law;

// ---------------------------------------------------------------------------
// Spine weight zeta

struct Unit_weight {};

// zeta(t) = exp(lambda (X(t) - X(0)) - lambda^2 sigma^2 t / 2); Brownian motion only.
struct Girsanov_weight {
  double lambda = 0.0;
};

using Spine_weight = std::variant<Unit_weight, Girsanov_weight>;

// ---------------------------------------------------------------------------

struct Model_spec {
  Motion_model motion;
  Rate_function rate;
  Offspring_law offspring = Offspring_law::deterministic(2);
  Spine_weight zeta = Unit_weight{};

  auto mean_offspring() const -> double { return offspring_mean(offspring); }
  auto branching_excess() const -> double { return mean_offspring() - 1.0; }
  // Drift added to the spine's motion under the tilted measure.
  auto spine_drift() const -> double;
  auto girsanov_lambda() const -> double;
  auto sigma() const -> double;
};

struct Validation_report {
  std::vector<std::string> errors;    // "field.path: message"
  std::vector<std::string> warnings;

  auto ok() const -> bool { return errors.empty(); }
};

auto validate_spec(const Model_spec& spec) -> Validation_report;
// Throws Invalid_model listing every error; returns the warnings.
auto require_valid(const Model_spec& spec) -> std::vector<std::string>;

// log zeta along `path` at time t (path measured from its own start).
auto log_zeta(const Model_spec& spec, Path_view path, double t) -> double;
auto zeta_eval(const Model_spec& spec, Path_view path, double t) -> double;

auto describe(const Model_spec& spec) -> std::string;

}  // namespace spinelaw
