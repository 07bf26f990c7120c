#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinelaw/motion.hpp"
#include "spinelaw/path.hpp"

namespace spinelaw {

// Ulam-Harris label: child indices from the root. The root is the empty sequence.
class Label {
 public:
  Label() = default;
  explicit Label(std::vector<std::uint32_t> indices) : indices_{std::move(indices)} {}

  static auto root() -> Label { return {}; }
  // Accepts "root" or dot-separated child indices such as "0.1.0".
  static auto parse(std::string_view text) -> Label;

  auto child(std::uint32_t index) const -> Label;
  auto parent() const -> Label;
  auto is_root() const -> bool { return indices_.empty(); }
  auto depth() const -> std::size_t { return indices_.size(); }
  auto indices() const -> std::span<const std::uint32_t> { return indices_; }
  auto is_prefix_of(const Label& other) const -> bool;
  auto to_string() const -> std::string;

  auto operator<=>(const Label&) const = default;

 private:
  std::vector<std::uint32_t> indices_;
};

using Particle_index = std::uint32_t;
inline constexpr Particle_index k_no_particle = std::numeric_limits<Particle_index>::max();

// Flat per-particle storage. Particles are stored in preorder, which is also the
// lexicographic order of their labels.
struct Particle {
  Particle_index parent = k_no_particle;
  std::uint32_t child_index = 0;
  std::uint32_t generation = 0;
  std::uint32_t offspring = 0;
  std::uint64_t first_child = 0;
  double birth = 0.0;
  double death = std::numeric_limits<double>::infinity();  // +inf: alive at the horizon
  std::uint64_t knot_offset = 0;
  std::uint32_t knot_count = 0;

  auto dead() const -> bool { return death != std::numeric_limits<double>::infinity(); }
  auto alive_at(double t) const -> bool { return birth <= t && t < death; }
};

struct Particle_record {
  Label label;
  std::optional<Label> parent;
  double birth = 0.0;
  std::optional<double> death;
  std::optional<std::uint32_t> offspring_count;
  Path path;
};

class Tree {
 public:
  explicit Tree(Path_kind kind = Path_kind::piecewise_constant, double horizon = 0.0);

  // Clears all particles but keeps allocated capacity.
  void reset(Path_kind kind, double horizon);

  // --- construction, strictly in preorder -------------------------------------------------
  auto begin_particle(Particle_index parent, std::uint32_t child_index, double birth) -> Particle_index;
  // Knot buffers the particle under construction appends its path to.
  auto knot_times() -> std::vector<double>& { return knot_times_; }
  auto knot_values() -> std::vector<double>& { return knot_values_; }
  void end_particle(Particle_index index, const Lifetime_outcome& outcome, std::uint32_t offspring);
  void mark_truncated() { truncated_ = true; }
  void finalize();

  // --- queries ------------------------------------------------------------------------------
  auto size() const -> std::size_t { return particles_.size(); }
  auto horizon() const -> double { return horizon_; }
  auto truncated() const -> bool { return truncated_; }
  auto extinct_at() const -> std::optional<double> { return extinct_at_; }
  auto path_kind() const -> Path_kind { return path_kind_; }

  auto particle(Particle_index i) const -> const Particle& { return particles_[i]; }
  auto particles() const -> std::span<const Particle> { return particles_; }
  auto path(Particle_index i) const -> Path_view;
  auto children(Particle_index i) const -> std::span<const Particle_index>;
  auto label(Particle_index i) const -> Label;
  auto find(const Label& label) const -> std::optional<Particle_index>;
  auto record(const Label& label) const -> Particle_record;
  // Root first, `i` last.
  auto lineage(Particle_index i) const -> std::vector<Particle_index>;

  // Indices alive at t in lexicographic label order. Throws Query_out_of_range / Truncated_tree.
  void alive_indices(double t, std::vector<Particle_index>& out) const;
  auto alive_indices(double t) const -> std::vector<Particle_index>;
  void require_queryable(double t) const;

  // "label,parent,birth,death,offspring" records, one per line, preceded by that header.
  void dump(std::ostream& out) const;
  // Structural invariant violations; empty for a well-formed tree.
  auto check_invariants() const -> std::vector<std::string>;

 private:
  Path_kind path_kind_;
  double horizon_;
  bool truncated_ = false;
  std::optional<double> extinct_at_;
  std::vector<Particle> particles_;
  std::vector<Particle_index> children_;
  std::vector<double> knot_times_;
  std::vector<double> knot_values_;
};

auto alive_at(const Tree& tree, double t) -> std::vector<Label>;

// Concatenated path of u's ancestors and u, restricted to [0, t]. Throws Not_alive.
auto ancestry_path(const Tree& tree, const Label& u, double t) -> Path;
auto ancestry_path(const Tree& tree, Particle_index u, double t) -> Path;

// Branching events on u's line of descent in [0, t).
auto births_along(const Tree& tree, const Label& u, double t) -> std::size_t;
auto births_along(const Tree& tree, Particle_index u, double t) -> std::size_t;

// Throws Not_alive unless u is alive at t (after the range and truncation checks).
auto require_alive(const Tree& tree, Particle_index u, double t) -> void;

}  // namespace spinelaw
