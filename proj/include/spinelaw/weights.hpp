#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "spinelaw/model.hpp"
#include "spinelaw/tree.hpp"

namespace spinelaw {

// ---------------------------------------------------------------------------
// Additive functionals f_u(t)

// f = 1.
struct Unit_functional {};

// 1{ |n_t / t - target| < epsilon }, n_t the branch events along the ancestry in [0, t).
struct Birth_rate_indicator {
  double target = 2.0;
  double epsilon = 0.5;
};

enum class Occupation_map { identity, square, window };

// g( (1/t) * integral_0^t h(X(s)) ds ) with h tabulated by chain state.
struct Occupation_average {
  std::vector<double> h = {0.0, 1.0};
  Occupation_map g = Occupation_map::identity;
  double window_lo = 0.0;  // window: 1{lo < x < hi}
  double window_hi = 1.0;

  auto apply_g(double x) const -> double;
};

// 1{ |(X(t) - X(0)) / t - speed| < epsilon }.
struct Terminal_speed_indicator {
  double speed = 0.0;
  double epsilon = 0.3;
};

using Additive_functional =
    std::variant<Unit_functional, Birth_rate_indicator, Occupation_average, Terminal_speed_indicator>;

// Throws Invalid_model when the functional cannot be evaluated on this model's paths.
void validate_functional(const Additive_functional& f, const Model_spec& spec);

auto eval_functional(const Additive_functional& f, const Tree& tree, const Label& u, double t) -> double;
auto eval_functional(const Additive_functional& f, const Tree& tree, Particle_index u, double t) -> double;

// ---------------------------------------------------------------------------
// Weights w_u(t) = exp(-int_0^t M R (X_u(s)) ds) * zeta_u(t)

auto particle_weight(const Tree& tree, const Model_spec& spec, const Label& u, double t) -> double;
auto additive_martingale(const Tree& tree, const Model_spec& spec, double t) -> double;
// sum_u f_u(t) w_u(t) / Z(t). Throws Extinction_at_t when nobody is alive.
auto weighted_sum(const Tree& tree, const Model_spec& spec, const Additive_functional& f, double t) -> double;
// w_u(t) / Z(t) for every alive u, in lexicographic label order.
auto spine_posterior(const Tree& tree, const Model_spec& spec, double t) -> std::vector<std::pair<Label, double>>;

// Everything needed to evaluate sums over N(t) for one tree at one time. Log-weights are kept
// and summed with a max shift so Girsanov weights neither overflow nor underflow.
class Population_snapshot {
 public:
  Population_snapshot() = default;
  Population_snapshot(const Tree& tree, const Model_spec& spec, double t);

  void assign(const Tree& tree, const Model_spec& spec, double t);

  auto t() const -> double { return t_; }
  auto alive() const -> std::span<const Particle_index> { return alive_; }
  auto log_weights() const -> std::span<const double> { return log_weights_; }
  auto population() const -> std::size_t { return alive_.size(); }
  auto extinct() const -> bool { return alive_.empty(); }

  auto z() const -> double;
  auto log_z() const -> double;
  // sum_u v_u w_u and sum_u v_u w_u / Z for values aligned with alive().
  auto weighted_total(std::span<const double> values) const -> double;
  auto normalized(std::span<const double> values) const -> double;
  auto posterior() const -> std::vector<double>;

 private:
  double t_ = 0.0;
  std::vector<Particle_index> alive_;
  std::vector<double> log_weights_;
  double max_log_weight_ = 0.0;
  double shifted_total_ = 0.0;  // sum exp(log w - max)
};

// f_u(t) for every u in snapshot.alive(), computed in one pass over the tree.
void functional_values(const Additive_functional& f, const Tree& tree, const Population_snapshot& snapshot,
                       std::vector<double>& out);

// integral_0^t g(X_u(s)) ds for every u in `alive`, in one preorder pass: the integral up to a
// particle's birth is its parent's integral up to the parent's death.
template <typename G>
void ancestral_integrals(const Tree& tree, std::span<const Particle_index> alive, double t, G&& g,
                         std::vector<double>& out) {
  const auto particles = tree.particles();
  auto at_death = std::vector<double>(particles.size(), 0.0);
  for (auto i = std::size_t{0}; i < particles.size(); ++i) {
    const auto& p = particles[i];
    if (p.birth > t || !p.dead() || p.death > t) continue;
    const auto at_birth = p.parent == k_no_particle ? 0.0 : at_death[p.parent];
    at_death[i] = at_birth + integrate(tree.path(static_cast<Particle_index>(i)), g, p.birth, p.death);
  }
  out.resize(alive.size());
  for (auto k = std::size_t{0}; k < alive.size(); ++k) {
    const auto& p = particles[alive[k]];
    const auto at_birth = p.parent == k_no_particle ? 0.0 : at_death[p.parent];
    out[k] = at_birth + integrate(tree.path(alive[k]), g, p.birth, t);
  }
}

}  // namespace spinelaw
