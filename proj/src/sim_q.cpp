#include "spinelaw/sim_q.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace spinelaw {

namespace {

constexpr std::uint64_t k_spine_stream_tag = 0x5b1e;

struct Pending {
  bool spine;
  std::uint32_t segment;
  Particle_index parent;
  std::uint32_t child_index;
  double birth;
  State state;
  std::uint64_t label_hash;
};

}  // namespace

auto Spine_record::branches_before(double t) const -> std::size_t {
  return static_cast<std::size_t>(std::lower_bound(branch_times.begin(), branch_times.end(), t) - branch_times.begin());
}

auto Spine_record::segment_at(double t) const -> std::size_t {
  if (!(t >= 0.0 && t <= horizon)) {
    throw Error{Error_kind::query_out_of_range, fmt::format("t={} outside [0, {}]", t, horizon)};
  }
  return static_cast<std::size_t>(std::upper_bound(branch_times.begin(), branch_times.end(), t) - branch_times.begin());
}

auto simulate_spine_only(const Model_spec& spec, double horizon, const Rng_handle& rng,
                         std::span<const double> observation_times) -> Spine_record {
  require_valid(spec);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error{Error_kind::invalid_model, "caps.horizon: must be > 0"};
  }
  const auto biased = size_bias(spec.offspring);
  const auto law = Lifetime_law{spec.mean_offspring(), spec.spine_drift()};
  auto stream = rng.stream(k_spine_stream_tag);

  auto record = Spine_record{};
  record.horizon = horizon;
  record.spine_path = Path{spec.motion.path_kind(), 0.0, spec.motion.start};
  auto label = Label::root();
  auto times = std::vector<double>{};
  auto values = std::vector<double>{};
  auto t = 0.0;
  auto state = spec.motion.start;
  for (auto segment = std::uint64_t{0};; ++segment) {
    record.spine_labels.push_back(label);
    times.clear();
    values.clear();
    const auto outcome = sample_lifetime(spec, law, t, state, horizon, observation_times, stream,
                                         hash_combine(rng.family_seed(), segment), times, values);
    auto piece = Path_view{spec.motion.path_kind(), times, values, outcome.end};
    record.spine_path.concatenate(piece);
    if (!outcome.died) break;
    const auto k = biased.sample(stream);
    const auto chosen = std::min<std::uint32_t>(static_cast<std::uint32_t>(stream.uniform() * k), k - 1);
    record.branch_times.push_back(outcome.end);
    record.offspring_counts.push_back(k);
    record.spine_children.push_back(chosen);
    label = label.child(chosen);
    t = outcome.end;
    state = outcome.end_state;
  }
  return record;
}

void simulate_q_tree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng, Q_tree& out) {
  validate_caps(caps);
  out.spine = simulate_spine_only(spec, caps.horizon, rng, caps.observation_times);
  out.spine_particles.clear();
  auto& tree = out.tree;
  tree.reset(spec.motion.path_kind(), caps.horizon);

  const auto subtrees = Rng_handle{rng.master_seed, rng.replication, Stream_purpose::q_subtree};
  const auto& spine = out.spine;
  const auto spine_view = spine.spine_path.view();
  auto stack = std::vector<Pending>{{true, 0, k_no_particle, 0, 0.0, spec.motion.start, k_root_label_hash}};
  while (!stack.empty()) {
    const auto item = stack.back();
    stack.pop_back();
    if (!item.spine) {
      if (!grow_subtree(spec, caps, subtrees, item.parent, item.child_index, item.birth, item.state, item.label_hash,
                        tree)) {
        break;
      }
      continue;
    }
    if (tree.size() >= caps.max_particles) {
      tree.mark_truncated();
      break;
    }
    const auto k = item.segment;
    const auto index = tree.begin_particle(item.parent, item.child_index, item.birth);
    out.spine_particles.push_back(index);
    const auto from = spine.segment_start(k);
    const auto to = spine.segment_end(k);
    const auto piece = restrict_path(spine_view, from, to);
    auto& kt = tree.knot_times();
    auto& kv = tree.knot_values();
    kt.insert(kt.end(), piece.times().begin(), piece.times().end());
    kv.insert(kv.end(), piece.values().begin(), piece.values().end());
    const auto died = k < spine.branch_times.size();
    const auto end_state = spine_view.value_at(to);
    const auto offspring = died ? spine.offspring_counts[k] : 0u;
    tree.end_particle(index, {to, died, end_state}, offspring);
    for (auto c = offspring; c > 0; --c) {
      const auto child = c - 1;
      const auto hash = child_label_hash(item.label_hash, child);
      stack.push_back({child == spine.spine_children[k], k + 1, index, child, to, end_state, hash});
    }
  }
  tree.finalize();
}

auto simulate_q_tree(const Model_spec& spec, const Sim_caps& caps, const Rng_handle& rng) -> Q_tree {
  auto out = Q_tree{};
  simulate_q_tree(spec, caps, rng, out);
  return out;
}

}  // namespace spinelaw
