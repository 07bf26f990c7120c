#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "spinelaw/sim_p.hpp"
#include "spinelaw/stats.hpp"
#include "spinelaw/weights.hpp"

using namespace spinelaw;

namespace {

auto caps_for(double horizon, std::vector<double> obs = {}) -> Sim_caps {
  auto caps = Sim_caps{};
  caps.horizon = horizon;
  caps.observation_times = std::move(obs);
  return caps;
}

auto constant_model(double beta, Offspring_law law = Offspring_law::deterministic(2)) -> Model_spec {
  auto spec = Model_spec{};
  spec.rate = Constant_rate{beta};
  spec.offspring = std::move(law);
  return spec;
}

auto tilted(double lambda) -> Model_spec {
  auto spec = constant_model(1.0);
  spec.motion.kind = Brownian_motion{1.0};
  spec.motion.path_step = 0.05;
  spec.zeta = Girsanov_weight{lambda};
  return spec;
}

auto chain_table_model() -> Model_spec {
  auto spec = Model_spec{};
  spec.motion.kind = Two_state_chain{1.0, 2.0};
  spec.rate = State_rate_table{{0.5, 1.5}};
  spec.offspring = Offspring_law::poisson(1.8);
  return spec;
}

// A lone root on a two-state path: state 0 on [0, 2.8), state 1 on [2.8, 4].
auto lone_chain_root() -> Tree {
  auto tree = Tree{Path_kind::piecewise_constant, 4.0};
  const auto root = tree.begin_particle(k_no_particle, 0, 0.0);
  tree.knot_times().insert(tree.knot_times().end(), {0.0, 2.8});
  tree.knot_values().insert(tree.knot_values().end(), {0.0, 1.0});
  tree.end_particle(root, Lifetime_outcome{4.0, false, 1.0}, 0);
  tree.finalize();
  return tree;
}

// A chain of three particles with 3 births before t = 2.
auto three_births() -> Tree {
  auto tree = Tree{Path_kind::piecewise_constant, 2.0};
  auto parent = k_no_particle;
  const double births[] = {0.0, 0.5, 1.0, 1.5};
  for (auto k = 0; k < 4; ++k) {
    const auto i = tree.begin_particle(parent, 0, births[k]);
    tree.knot_times().push_back(births[k]);
    tree.knot_values().push_back(0.0);
    const auto last = k == 3;
    tree.end_particle(i, Lifetime_outcome{last ? 2.0 : births[k + 1], !last, 0.0}, last ? 0 : 1);
    parent = i;
  }
  tree.finalize();
  return tree;
}

}  // namespace

TEST(ParticleWeight, ConstantModelWeightsAreEqual) {
  const auto spec = constant_model(0.7, Offspring_law::poisson(2.5));
  const auto tree = simulate_tree(spec, caps_for(3.0), Rng_handle{1});
  for (const auto t : {0.0, 1.0, 3.0}) {
    for (const auto& u : alive_at(tree, t)) {
      EXPECT_NEAR(particle_weight(tree, spec, u, t), std::exp(-1.5 * 0.7 * t), 1e-14);
    }
  }
}

TEST(ParticleWeight, GirsanovProductForm) {
  const auto spec = tilted(0.8);
  const auto tree = simulate_tree(spec, caps_for(2.0, {2.0}), Rng_handle{2});
  for (const auto u : tree.alive_indices(2.0)) {
    const auto x = tree.path(u).value_at(2.0);
    EXPECT_NEAR(particle_weight(tree, spec, tree.label(u), 2.0), std::exp(0.8 * x - 0.32 * 2.0 - 2.0), 1e-12);
  }
}

TEST(ParticleWeight, StateDependentRateMatchesSegmentSum) {
  const auto spec = chain_table_model();
  for (auto rep = 0u; rep < 20; ++rep) {
    const auto tree = simulate_tree(spec, caps_for(3.0), Rng_handle{3, rep});
    if (tree.truncated()) continue;
    const auto t = 2.5;
    auto snapshot = Population_snapshot{tree, spec, t};
    const auto alive = snapshot.alive();
    for (auto k = std::size_t{0}; k < alive.size(); ++k) {
      // Sum over ancestors of M * R integrated over their own lifetimes.
      auto exponent = 0.0;
      for (const auto a : tree.lineage(alive[k])) {
        const auto view = tree.path(a);
        const auto end = std::min(view.end, t);
        const auto times = view.times;
        for (auto j = std::size_t{0}; j < times.size() && times[j] < end; ++j) {
          const auto next = j + 1 < times.size() ? std::min(times[j + 1], end) : end;
          exponent += 0.8 * (view.values[j] == 0.0 ? 0.5 : 1.5) * (next - times[j]);
        }
      }
      EXPECT_NEAR(snapshot.log_weights()[k], -exponent, 1e-10);
      EXPECT_NEAR(particle_weight(tree, spec, tree.label(alive[k]), t), std::exp(-exponent), 1e-12);
    }
  }
}

TEST(AdditiveMartingale, ConstantModelAndTimeZero) {
  const auto spec = constant_model(1.0);
  for (auto rep = 0u; rep < 20; ++rep) {
    const auto tree = simulate_tree(spec, caps_for(3.0), Rng_handle{4, rep});
    EXPECT_EQ(additive_martingale(tree, spec, 0.0), 1.0);
    const auto n = double(tree.alive_indices(3.0).size());
    EXPECT_NEAR(additive_martingale(tree, spec, 3.0), std::exp(-3.0) * n, 1e-12 * n);
  }
  EXPECT_EQ(additive_martingale(simulate_tree(tilted(1.0), caps_for(1.0), Rng_handle{}), tilted(1.0), 0.0), 1.0);
}

TEST(AdditiveMartingale, ZeroExactlyWhenExtinct) {
  const auto spec = constant_model(1.0, Offspring_law::two_point(0.6));
  auto seen_extinct = false;
  for (auto rep = 0u; rep < 100; ++rep) {
    const auto tree = simulate_tree(spec, caps_for(3.0), Rng_handle{5, rep});
    const auto z = additive_martingale(tree, spec, 3.0);
    const auto extinct = tree.alive_indices(3.0).empty();
    seen_extinct = seen_extinct || extinct;
    EXPECT_EQ(z == 0.0, extinct);
  }
  EXPECT_TRUE(seen_extinct);
}

TEST(AdditiveMartingale, TruncatedTreeIsRejected) {
  auto caps = caps_for(8.0);
  caps.max_particles = 50;
  const auto tree = simulate_tree(constant_model(1.0), caps, Rng_handle{});
  try {
    additive_martingale(tree, constant_model(1.0), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error_kind::truncated_tree);
  }
}

TEST(AdditiveMartingale, MeanOneAtDeskScale) {
  const auto spec = constant_model(1.0);
  const auto caps = caps_for(4.0);
  auto z = std::vector<std::vector<double>>(3);
  for (auto rep = 0u; rep < 10'000; ++rep) {
    const auto tree = simulate_tree(spec, caps, Rng_handle{6, rep});
    z[0].push_back(additive_martingale(tree, spec, 1.0));
    z[1].push_back(additive_martingale(tree, spec, 2.0));
    z[2].push_back(additive_martingale(tree, spec, 4.0));
  }
  for (const auto& sample : z) EXPECT_LE(std::abs(*summarize(sample, 1.0).z), 4.0);
}

// Grid refinement leaves terminal values, and so Z, unchanged.
TEST(AdditiveMartingale, PathStepDoesNotChangeZ) {
  auto coarse = tilted(0.5);
  auto fine = coarse;
  fine.motion.path_step = coarse.motion.path_step / 10.0;
  for (auto rep = 0u; rep < 10; ++rep) {
    const auto a = simulate_tree(coarse, caps_for(3.0, {1.0, 3.0}), Rng_handle{7, rep});
    const auto b = simulate_tree(fine, caps_for(3.0, {1.0, 3.0}), Rng_handle{7, rep});
    for (const auto t : {1.0, 3.0}) {
      const auto za = additive_martingale(a, coarse, t);
      EXPECT_NEAR(additive_martingale(b, fine, t), za, 1e-6 * za);
    }
  }
}

TEST(WeightedSum, UnitFunctionalIsExactlyOne) {
  for (const auto& spec : {constant_model(1.0), tilted(1.5), chain_table_model()}) {
    const auto tree = simulate_tree(spec, caps_for(3.0, {3.0}), Rng_handle{8});
    if (tree.alive_indices(3.0).empty()) continue;
    EXPECT_EQ(weighted_sum(tree, spec, Unit_functional{}, 3.0), 1.0);
  }
}

TEST(WeightedSum, ConstantModelIsThePlainAverage) {
  const auto spec = constant_model(1.0);
  const auto f = Additive_functional{Birth_rate_indicator{2.0, 0.5}};
  for (auto rep = 0u; rep < 50; ++rep) {
    const auto tree = simulate_tree(spec, caps_for(4.0), Rng_handle{9, rep});
    for (const auto t : {2.0, 4.0}) {
      auto total = 0.0;
      const auto alive = tree.alive_indices(t);
      for (const auto u : alive) total += eval_functional(f, tree, u, t);
      const auto plain = total / double(alive.size());
      const auto ws = weighted_sum(tree, spec, f, t);
      EXPECT_NEAR(ws, plain, 1e-15);
      EXPECT_GE(ws, 0.0);
      EXPECT_LE(ws, 1.0);
    }
  }
}

TEST(WeightedSum, SingleParticleAndExtinction) {
  const auto tree = lone_chain_root();
  auto spec = Model_spec{};
  spec.motion.kind = Two_state_chain{1.0, 1.0};
  spec.rate = Constant_rate{0.0};
  const auto f = Additive_functional{Occupation_average{{0.0, 1.0}, Occupation_map::identity}};
  EXPECT_DOUBLE_EQ(weighted_sum(tree, spec, f, 4.0), eval_functional(f, tree, Label::root(), 4.0));

  const auto mortal = constant_model(3.0, Offspring_law::deterministic(0));
  const auto dead = simulate_tree(mortal, caps_for(10.0), Rng_handle{});
  ASSERT_TRUE(dead.extinct_at());
  try {
    weighted_sum(dead, mortal, Unit_functional{}, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error_kind::extinction_at_t);
  }
  EXPECT_THROW(spine_posterior(dead, mortal, 10.0), Error);
}

TEST(SpinePosterior, NormalizedAndUniformForConstantModels) {
  const auto spec = constant_model(1.0);
  const auto tree = simulate_tree(spec, caps_for(3.0), Rng_handle{10});
  const auto post = spine_posterior(tree, spec, 3.0);
  ASSERT_FALSE(post.empty());
  auto total = 0.0;
  for (const auto& [label, p] : post) {
    total += p;
    EXPECT_NEAR(p, 1.0 / double(post.size()), 1e-15);
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
  const auto labels = alive_at(tree, 3.0);
  for (auto k = std::size_t{0}; k < labels.size(); ++k) EXPECT_EQ(post[k].first, labels[k]);
}

TEST(SpinePosterior, SingleParticle) {
  const auto spec = constant_model(0.0);
  const auto post = spine_posterior(simulate_tree(spec, caps_for(1.0), Rng_handle{}), spec, 1.0);
  ASSERT_EQ(post.size(), 1u);
  EXPECT_TRUE(post[0].first.is_root());
  EXPECT_EQ(post[0].second, 1.0);
}

TEST(SpinePosterior, GirsanovIsProportionalToExpLambdaX) {
  const auto spec = tilted(1.3);
  for (auto rep = 0u; rep < 10; ++rep) {
    const auto tree = simulate_tree(spec, caps_for(2.0, {2.0}), Rng_handle{11, rep});
    const auto post = spine_posterior(tree, spec, 2.0);
    auto norm = 0.0;
    for (const auto u : tree.alive_indices(2.0)) norm += std::exp(1.3 * tree.path(u).value_at(2.0));
    auto total = 0.0;
    for (const auto& [label, p] : post) {
      const auto x = tree.path(*tree.find(label)).value_at(2.0);
      EXPECT_NEAR(p, std::exp(1.3 * x) / norm, 1e-12);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(EvalFunctional, Examples) {
  const auto births = three_births();
  const auto f = Additive_functional{Birth_rate_indicator{2.0, 0.5}};
  const auto last = Label::parse("0.0.0");
  EXPECT_EQ(births_along(births, last, 2.0), 3u);
  EXPECT_EQ(eval_functional(f, births, last, 2.0), 0.0);  // |1.5 - 2| < 0.5 is false
  EXPECT_EQ(eval_functional(Additive_functional{Birth_rate_indicator{2.0, 0.51}}, births, last, 2.0), 1.0);

  const auto root = lone_chain_root();
  const auto occupation = Additive_functional{Occupation_average{{0.0, 1.0}, Occupation_map::identity}};
  EXPECT_NEAR(eval_functional(occupation, root, Label::root(), 4.0), 0.3, 1e-15);
  const auto square = Additive_functional{Occupation_average{{0.0, 1.0}, Occupation_map::square}};
  EXPECT_NEAR(eval_functional(square, root, Label::root(), 4.0), 0.09, 1e-15);
  const auto window = Additive_functional{Occupation_average{{0.0, 1.0}, Occupation_map::window, 0.25, 0.35}};
  EXPECT_EQ(eval_functional(window, root, Label::root(), 4.0), 1.0);

  auto all_one = Tree{Path_kind::piecewise_constant, 3.0};
  const auto i = all_one.begin_particle(k_no_particle, 0, 0.0);
  all_one.knot_times().push_back(0.0);
  all_one.knot_values().push_back(1.0);
  all_one.end_particle(i, Lifetime_outcome{3.0, false, 1.0}, 0);
  EXPECT_EQ(eval_functional(occupation, all_one, Label::root(), 3.0), 1.0);

  try {
    eval_functional(occupation, root, Label::root(), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error_kind::query_out_of_range);
  }
  EXPECT_THROW(eval_functional(f, births, Label::parse("0"), 2.0), Error);
}

TEST(FunctionalValues, AgreeWithPerParticleEvaluation) {
  const auto spec = chain_table_model();
  const auto fs = std::vector<Additive_functional>{
      Occupation_average{{0.2, 1.7}, Occupation_map::square}, Birth_rate_indicator{1.0, 0.4}, Unit_functional{}};
  for (auto rep = 0u; rep < 20; ++rep) {
    const auto tree = simulate_tree(spec, caps_for(3.0), Rng_handle{12, rep});
    const auto snapshot = Population_snapshot{tree, spec, 3.0};
    for (const auto& f : fs) {
      auto values = std::vector<double>{};
      functional_values(f, tree, snapshot, values);
      for (auto k = std::size_t{0}; k < values.size(); ++k) {
        EXPECT_NEAR(values[k], eval_functional(f, tree, snapshot.alive()[k], 3.0), 1e-12);
      }
    }
  }
}

TEST(TerminalSpeed, UsesDisplacementOverTime) {
  auto spec = tilted(0.5);
  spec.motion.start = 3.0;
  const auto tree = simulate_tree(spec, caps_for(2.0, {2.0}), Rng_handle{13});
  const auto f = Additive_functional{Terminal_speed_indicator{0.5, 0.3}};
  for (const auto u : tree.alive_indices(2.0)) {
    const auto speed = (tree.path(u).value_at(2.0) - 3.0) / 2.0;
    EXPECT_EQ(eval_functional(f, tree, u, 2.0), std::abs(speed - 0.5) < 0.3 ? 1.0 : 0.0);
  }
}
