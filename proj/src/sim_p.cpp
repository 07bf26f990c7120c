#include "spinelaw/sim_p.hpp"

#include <cmath>

#include <fmt/format.h>

namespace spinelaw {

namespace {

struct Pending {
  Particle_index parent;
  std::uint32_t child_index;
  double birth;
  State state;
  std::uint64_t label_hash;
};

}  // namespace

void validate_caps(const Sim_caps& caps) {
  if (caps.max_particles < 1) {
    throw Error{Error_kind::invalid_model, "caps.max_particles: must be >= 1"};
  }
  if (!(caps.horizon > 0.0) || !std::isfinite(caps.horizon)) {
    throw Error{Error_kind::invalid_model, "caps.horizon: must be > 0"};
  }
}

auto grow_subtree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng, Particle_index parent,
                  std::uint32_t child_index, double birth, State state, std::uint64_t label_hash, Tree& tree) -> bool {
  const auto law = Lifetime_law{};
  const auto family = rng.family_seed();
  auto stack = std::vector<Pending>{{parent, child_index, birth, state, label_hash}};
  while (!stack.empty()) {
    const auto item = stack.back();
    stack.pop_back();
    if (tree.size() >= caps.max_particles) {
      tree.mark_truncated();
      return false;
    }
    const auto index = tree.begin_particle(item.parent, item.child_index, item.birth);
    auto stream = rng.stream(item.label_hash);
    const auto outcome = sample_lifetime(spec, law, item.birth, item.state, caps.horizon, caps.observation_times,
                                         stream, hash_combine(family, ~item.label_hash), tree.knot_times(),
                                         tree.knot_values());
    const auto offspring = outcome.died ? spec.offspring.sample(stream) : 0u;
    tree.end_particle(index, outcome, offspring);
    for (auto c = offspring; c > 0; --c) {
      stack.push_back({index, c - 1, outcome.end, outcome.end_state, child_label_hash(item.label_hash, c - 1)});
    }
  }
  return true;
}

void simulate_tree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng, Tree& out) {
  require_valid(spec);
  validate_caps(caps);
  out.reset(spec.motion.path_kind(), caps.horizon);
  grow_subtree(spec, caps, rng, k_no_particle, 0, 0.0, spec.motion.start, k_root_label_hash, out);
  out.finalize();
}

auto simulate_tree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng) -> Tree {
  auto tree = Tree{};
  simulate_tree(spec, caps, rng, tree);
  return tree;
}

auto root_lifetime_law_check(const Model_spec& spec, std::size_t reps, double t, std::uint64_t master_seed)
    -> Survival_estimate {
  require_valid(spec);
  if (reps == 0 || !(t >= 0.0)) {
    throw Error{Error_kind::insufficient_data, "root lifetime check needs reps >= 1 and t >= 0"};
  }
  auto survived = std::size_t{0};
  auto times = std::vector<double>{};
  auto values = std::vector<double>{};
  const auto horizon = std::nextafter(t, std::numeric_limits<double>::infinity());
  for (auto r = std::size_t{0}; r < reps; ++r) {
    const auto handle = Rng_handle{master_seed, r, Stream_purpose::root_lifetime};
    auto stream = handle.stream(k_root_label_hash);
    times.clear();
    values.clear();
    const auto outcome = sample_lifetime(spec, Lifetime_law{}, 0.0, spec.motion.start, horizon, {}, stream,
                                         hash_combine(handle.family_seed(), ~k_root_label_hash), times, values);
    if (!outcome.died || outcome.end > t) ++survived;
  }
  const auto n = static_cast<double>(reps);
  const auto p = static_cast<double>(survived) / n;
  return {p, std::sqrt(p * (1.0 - p) / n), reps};
}

}  // namespace spinelaw
