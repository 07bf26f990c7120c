#pragma once

#include <cstddef>
#include <vector>

#include "spinelaw/model.hpp"
#include "spinelaw/rng.hpp"
#include "spinelaw/tree.hpp"

namespace spinelaw {

struct Sim_caps {
  std::size_t max_particles = 1'000'000;
  double horizon = 1.0;
  // Sorted times at which diffusion paths are sampled exactly (the experiment grid).
  std::vector<double> observation_times;
};

void validate_caps(const Sim_caps& caps);

// Builds one realization under the original measure. Particles are simulated depth-first
// (a full lifetime, then each child in order), each from its own stream keyed by its label,
// so the result depends only on (spec, caps, rng). Hitting the particle cap returns a tree
// flagged truncated.
auto simulate_tree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng) -> Tree;
// Same, reusing `out`'s storage.
void simulate_tree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng, Tree& out);

// Grows the P-subtree rooted at a particle born at (birth, state) as child `child_index` of
// `parent`, appending it to `tree` in preorder. Returns false when the particle cap stopped it
// (the tree is then marked truncated).
auto grow_subtree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng, Particle_index parent,
                  std::uint32_t child_index, double birth, State state, std::uint64_t label_hash, Tree& tree) -> bool;

struct Survival_estimate {
  double survival = 0.0;
  double standard_error = 0.0;
  std::size_t reps = 0;
};

// Empirical P(root lifetime > t), drawing the root exactly as simulate_tree does.
auto root_lifetime_law_check(const Model_spec& spec, std::size_t reps, double t, std::uint64_t master_seed)
    -> Survival_estimate;

}  // namespace spinelaw
