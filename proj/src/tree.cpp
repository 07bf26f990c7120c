#include "spinelaw/tree.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

#include <fmt/format.h>

namespace spinelaw {

auto Label::parse(std::string_view text) -> Label {
  if (text == "root" || text.empty()) return {};
  auto indices = std::vector<std::uint32_t>{};
  auto rest = text;
  while (true) {
    const auto dot = rest.find('.');
    const auto token = rest.substr(0, dot);
    auto value = std::uint32_t{0};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
      throw Error{Error_kind::query_out_of_range, fmt::format("malformed label '{}'", text)};
    }
    indices.push_back(value);
    if (dot == std::string_view::npos) break;
    rest = rest.substr(dot + 1);
  }
  return Label{std::move(indices)};
}

auto Label::child(std::uint32_t index) const -> Label {
  auto indices = indices_;
  indices.push_back(index);
  return Label{std::move(indices)};
}

auto Label::parent() const -> Label {
  if (is_root()) {
    throw Error{Error_kind::query_out_of_range, "the root has no parent"};
  }
  return Label{std::vector<std::uint32_t>(indices_.begin(), indices_.end() - 1)};
}

auto Label::is_prefix_of(const Label& other) const -> bool {
  return indices_.size() <= other.indices_.size() &&
         std::equal(indices_.begin(), indices_.end(), other.indices_.begin());
}

auto Label::to_string() const -> std::string {
  if (is_root()) return "root";
  return fmt::format("{}", fmt::join(indices_, "."));
}

Tree::Tree(Path_kind kind, double horizon) : path_kind_{kind}, horizon_{horizon} {}

void Tree::reset(Path_kind kind, double horizon) {
  path_kind_ = kind;
  horizon_ = horizon;
  truncated_ = false;
  extinct_at_.reset();
  particles_.clear();
  children_.clear();
  knot_times_.clear();
  knot_values_.clear();
}

auto Tree::begin_particle(Particle_index parent, std::uint32_t child_index, double birth) -> Particle_index {
  const auto index = static_cast<Particle_index>(particles_.size());
  auto& p = particles_.emplace_back();
  p.parent = parent;
  p.child_index = child_index;
  p.birth = birth;
  p.knot_offset = knot_times_.size();
  if (parent != k_no_particle) {
    const auto& up = particles_[parent];
    p.generation = up.generation + 1;
    children_[up.first_child + child_index] = index;
  }
  return index;
}

void Tree::end_particle(Particle_index index, const Lifetime_outcome& outcome, std::uint32_t offspring) {
  auto& p = particles_[index];
  p.knot_count = static_cast<std::uint32_t>(knot_times_.size() - p.knot_offset);
  if (outcome.died) {
    p.death = outcome.end;
    p.offspring = offspring;
    p.first_child = children_.size();
    children_.resize(children_.size() + offspring, k_no_particle);
  }
}

void Tree::finalize() {
  extinct_at_.reset();
  if (truncated_ || particles_.empty()) return;
  auto last_death = 0.0;
  for (const auto& p : particles_) {
    if (!p.dead()) return;
    last_death = std::max(last_death, p.death);
  }
  extinct_at_ = last_death;
}

auto Tree::path(Particle_index i) const -> Path_view {
  const auto& p = particles_[i];
  const auto times = std::span<const double>{knot_times_}.subspan(p.knot_offset, p.knot_count);
  const auto values = std::span<const double>{knot_values_}.subspan(p.knot_offset, p.knot_count);
  return {path_kind_, times, values, std::min(p.death, horizon_)};
}

auto Tree::children(Particle_index i) const -> std::span<const Particle_index> {
  const auto& p = particles_[i];
  if (!p.dead()) return {};
  return std::span<const Particle_index>{children_}.subspan(p.first_child, p.offspring);
}

auto Tree::label(Particle_index i) const -> Label {
  auto indices = std::vector<std::uint32_t>(particles_[i].generation);
  for (auto k = indices.size(); k > 0; --k) {
    indices[k - 1] = particles_[i].child_index;
    i = particles_[i].parent;
  }
  return Label{std::move(indices)};
}

auto Tree::find(const Label& label) const -> std::optional<Particle_index> {
  if (particles_.empty()) return std::nullopt;
  auto i = Particle_index{0};
  for (const auto c : label.indices()) {
    const auto kids = children(i);
    if (c >= kids.size() || kids[c] == k_no_particle) return std::nullopt;
    i = kids[c];
  }
  return i;
}

auto Tree::record(const Label& label) const -> Particle_record {
  const auto i = find(label);
  if (!i) {
    throw Error{Error_kind::query_out_of_range, fmt::format("no particle labelled {}", label.to_string())};
  }
  const auto& p = particles_[*i];
  auto rec = Particle_record{};
  rec.label = label;
  if (!label.is_root()) rec.parent = label.parent();
  rec.birth = p.birth;
  if (p.dead()) {
    rec.death = p.death;
    rec.offspring_count = p.offspring;
  }
  const auto view = path(*i);
  rec.path = restrict_path(view, view.start(), view.end);
  return rec;
}

auto Tree::lineage(Particle_index i) const -> std::vector<Particle_index> {
  auto out = std::vector<Particle_index>(particles_[i].generation + 1);
  for (auto k = out.size(); k > 0; --k) {
    out[k - 1] = i;
    i = particles_[i].parent;
  }
  return out;
}

void Tree::require_queryable(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw Error{Error_kind::query_out_of_range, fmt::format("t={} outside [0, {}]", t, horizon_)};
  }
  if (truncated_) {
    throw Error{Error_kind::truncated_tree, "tree hit the particle cap"};
  }
}

void Tree::alive_indices(double t, std::vector<Particle_index>& out) const {
  require_queryable(t);
  out.clear();
  for (auto i = std::size_t{0}; i < particles_.size(); ++i) {
    if (particles_[i].alive_at(t)) out.push_back(static_cast<Particle_index>(i));
  }
}

auto Tree::alive_indices(double t) const -> std::vector<Particle_index> {
  auto out = std::vector<Particle_index>{};
  alive_indices(t, out);
  return out;
}

void Tree::dump(std::ostream& out) const {
  out << "label,parent,birth,death,offspring\n";
  for (auto i = std::size_t{0}; i < particles_.size(); ++i) {
    const auto& p = particles_[i];
    const auto lbl = label(static_cast<Particle_index>(i));
    out << lbl.to_string() << ',';
    if (!lbl.is_root()) out << lbl.parent().to_string();
    out << ',' << fmt::format("{:.17g}", p.birth) << ',';
    if (p.dead()) out << fmt::format("{:.17g}", p.death) << ',' << p.offspring;
    else out << ',';
    out << '\n';
  }
}

auto Tree::check_invariants() const -> std::vector<std::string> {
  auto problems = std::vector<std::string>{};
  if (particles_.empty()) {
    problems.emplace_back("no root");
    return problems;
  }
  if (particles_[0].parent != k_no_particle) problems.emplace_back("first particle is not the root");
  for (auto i = std::size_t{0}; i < particles_.size(); ++i) {
    const auto& p = particles_[i];
    const auto lbl = label(static_cast<Particle_index>(i)).to_string();
    if (i > 0 && p.parent == k_no_particle) problems.push_back(fmt::format("{}: second root", lbl));
    if (p.dead() && !(p.birth < p.death)) problems.push_back(fmt::format("{}: birth {} >= death {}", lbl, p.birth, p.death));
    if (p.dead() && p.death >= horizon_) problems.push_back(fmt::format("{}: death beyond horizon", lbl));
    if (p.parent != k_no_particle) {
      const auto& up = particles_[p.parent];
      if (p.child_index >= up.offspring) problems.push_back(fmt::format("{}: child index beyond parent's offspring", lbl));
      if (p.birth != up.death) problems.push_back(fmt::format("{}: born at {} but parent died at {}", lbl, p.birth, up.death));
      const auto parent_path = path(p.parent);
      if (path(static_cast<Particle_index>(i)).start_value() != parent_path.values.back()) {
        problems.push_back(fmt::format("{}: not born at the parent's death position", lbl));
      }
    }
    if (!truncated_) {
      for (const auto c : children(static_cast<Particle_index>(i))) {
        if (c == k_no_particle) problems.push_back(fmt::format("{}: missing child record", lbl));
      }
    }
    const auto view = path(static_cast<Particle_index>(i));
    if (view.times.empty() || view.start() != p.birth) problems.push_back(fmt::format("{}: path does not start at birth", lbl));
    for (auto k = std::size_t{1}; k < view.times.size(); ++k) {
      if (!(view.times[k] > view.times[k - 1])) problems.push_back(fmt::format("{}: knot times not increasing", lbl));
    }
    if (!view.times.empty() && view.times.back() > view.end) problems.push_back(fmt::format("{}: knot beyond path end", lbl));
    if (path_kind_ == Path_kind::sampled && !view.times.empty() && view.end > view.start() && view.times.back() != view.end) {
      problems.push_back(fmt::format("{}: sampled path does not reach its end", lbl));
    }
  }
  return problems;
}

auto alive_at(const Tree& tree, double t) -> std::vector<Label> {
  auto out = std::vector<Label>{};
  for (const auto i : tree.alive_indices(t)) out.push_back(tree.label(i));
  return out;
}

auto require_alive(const Tree& tree, Particle_index u, double t) -> void {
  tree.require_queryable(t);
  if (!tree.particle(u).alive_at(t)) {
    throw Error{Error_kind::not_alive, fmt::format("{} is not alive at t={}", tree.label(u).to_string(), t)};
  }
}

namespace {

auto locate(const Tree& tree, const Label& u) -> Particle_index {
  const auto i = tree.find(u);
  if (!i) {
    throw Error{Error_kind::not_alive, fmt::format("no particle labelled {}", u.to_string())};
  }
  return *i;
}

}  // namespace

auto ancestry_path(const Tree& tree, Particle_index u, double t) -> Path {
  require_alive(tree, u, t);
  auto out = Path{};
  for (const auto a : tree.lineage(u)) {
    if (a == u) {
      const auto own = tree.path(u);
      out.concatenate(restrict_path(own, own.start(), t).view());
    } else {
      out.concatenate(tree.path(a));
    }
  }
  return out;
}

auto ancestry_path(const Tree& tree, const Label& u, double t) -> Path {
  tree.require_queryable(t);
  return ancestry_path(tree, locate(tree, u), t);
}

auto births_along(const Tree& tree, Particle_index u, double t) -> std::size_t {
  require_alive(tree, u, t);
  const auto& p = tree.particle(u);
  // Events at exactly t are excluded: [0, t).
  if (p.generation > 0 && p.birth == t) return p.generation - 1;
  return p.generation;
}

auto births_along(const Tree& tree, const Label& u, double t) -> std::size_t {
  tree.require_queryable(t);
  return births_along(tree, locate(tree, u), t);
}

}  // namespace spinelaw
