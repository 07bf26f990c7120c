#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinelaw/model.hpp"
#include "spinelaw/rng.hpp"
#include "spinelaw/sim_p.hpp"
#include "spinelaw/tree.hpp"

namespace spinelaw {

// The marked line of descent up to the horizon. Segment k is the lifetime of spine_labels[k];
// it ends at branch_times[k] (or the horizon for the last segment).
struct Spine_record {
  double horizon = 0.0;
  std::vector<Label> spine_labels;
  Path spine_path;
  std::vector<double> branch_times;
  std::vector<std::uint32_t> offspring_counts;  // size-biased, never 0
  std::vector<std::uint32_t> spine_children;    // which child continued the spine

  auto segment_count() const -> std::size_t { return spine_labels.size(); }
  auto segment_start(std::size_t k) const -> double { return k == 0 ? 0.0 : branch_times[k - 1]; }
  auto segment_end(std::size_t k) const -> double { return k < branch_times.size() ? branch_times[k] : horizon; }
  // Spine branch events in [0, t).
  auto branches_before(double t) const -> std::size_t;
  // The spine particle at t (segment k with start <= t < end; the last segment at the horizon).
  auto segment_at(double t) const -> std::size_t;
  auto label_at(double t) const -> const Label& { return spine_labels[segment_at(t)]; }
};

struct Q_tree {
  Tree tree;
  Spine_record spine;
  std::vector<Particle_index> spine_particles;  // tree index of each spine segment

  auto spine_particle_at(double t) const -> Particle_index { return spine_particles[spine.segment_at(t)]; }
};

// Spine alone under the tilted measure: motion from the matched sampler (drift lambda sigma^2
// for the Girsanov weight, unchanged otherwise), branching at (1 + M) R by thinning against
// (1 + M_max) R_max when R is state-dependent, size-biased offspring counts and a uniform
// continuing child (one uniform per branch, whatever the count).
auto simulate_spine_only(const Model_spec& spec, double horizon, const Rng_handle& rng,
                         std::span<const double> observation_times = {}) -> Spine_record;

// Full tree under the tilted measure: the spine of simulate_spine_only with the same handle,
// plus independent original-measure subtrees for every non-spine child.
auto simulate_q_tree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng) -> Q_tree;
void simulate_q_tree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng, Q_tree& out);

}  // namespace spinelaw
