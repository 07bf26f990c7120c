#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "spinelaw/model.hpp"
#include "spinelaw/motion.hpp"

using namespace spinelaw;

namespace {

auto shipped_laws() -> std::vector<Offspring_law> {
  return {Offspring_law::deterministic(1), Offspring_law::deterministic(2), Offspring_law::deterministic(3),
          Offspring_law::two_point(0.5),   Offspring_law::two_point(0.2),   Offspring_law::geometric(0.4),
          Offspring_law::poisson(1.5),     Offspring_law::poisson(3.0)};
}

auto brownian_spec(double lambda) -> Model_spec {
  auto spec = Model_spec{};
  spec.motion.kind = Brownian_motion{1.0};
  spec.rate = Constant_rate{1.0};
  spec.zeta = Girsanov_weight{lambda};
  return spec;
}

}  // namespace

TEST(OffspringMean, ShippedExamples) {
  EXPECT_EQ(offspring_mean(Offspring_law::deterministic(2)), 2.0);
  EXPECT_DOUBLE_EQ(offspring_mean(Offspring_law::two_point(0.5)), 1.0);
  auto brute = 0.0;
  for (auto k = 0; k <= 200; ++k) brute += k * oracle::poisson_pmf(1.5, k);
  EXPECT_NEAR(offspring_mean(Offspring_law::poisson(1.5)), brute, 1e-12);
  EXPECT_NEAR(offspring_mean(Offspring_law::poisson(1.5)), 1.5, 1e-12);
  // Geometric on {0,1,...} with success probability p has mean (1-p)/p.
  EXPECT_NEAR(offspring_mean(Offspring_law::geometric(0.4)), 1.5, 1e-12);
}

TEST(OffspringLaw, RejectsInvalidParameters) {
  EXPECT_THROW(Offspring_law::two_point(1.5), Error);
  EXPECT_THROW(Offspring_law::geometric(0.0), Error);
  EXPECT_THROW(Offspring_law::poisson(-1.0), Error);
  EXPECT_THROW(Offspring_law::tabulated({0.5, 0.4}), Error);
  // Tails heavier than the fold threshold at k = 200 are refused.
  EXPECT_THROW(Offspring_law::poisson(150.0), Error);
  EXPECT_THROW(Offspring_law::geometric(0.05), Error);
}

TEST(SizeBias, PointMassIsFixed) {
  const auto b = size_bias(Offspring_law::deterministic(2));
  EXPECT_TRUE(b.is_point_mass());
  EXPECT_EQ(b.probability(2), 1.0);
}

TEST(SizeBias, TwoPointBecomesDeltaTwo) {
  const auto b = size_bias(Offspring_law::two_point(0.5));
  EXPECT_EQ(b.probability(0), 0.0);
  EXPECT_EQ(b.probability(1), 0.0);
  EXPECT_EQ(b.probability(2), 1.0);
}

TEST(SizeBias, PoissonMatchesFormulaToK200) {
  for (const auto mu : {0.5, 1.5, 3.0, 20.0}) {
    const auto b = size_bias(Offspring_law::poisson(mu));
    for (auto k = 0; k <= 200; ++k) {
      ASSERT_NEAR(b.probability(k), k * oracle::poisson_pmf(mu, k) / mu, 1e-12) << "mu=" << mu << " k=" << k;
    }
  }
}

TEST(SizeBias, ZeroMeanIsInvalid) {
  try {
    size_bias(Offspring_law::deterministic(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error_kind::invalid_model);
  }
}

TEST(SizeBias, PropertiesOverShippedLaws) {
  for (const auto& law : shipped_laws()) {
    const auto b = size_bias(law);
    const auto& pmf = b.pmf();
    EXPECT_NEAR(std::accumulate(pmf.begin(), pmf.end(), 0.0), 1.0, 1e-10);
    auto second = 0.0;
    for (auto k = std::size_t{0}; k <= law.max_count(); ++k) second += double(k * k) * law.probability(k);
    const auto m = offspring_mean(law);
    EXPECT_NEAR(offspring_mean(b), second / m, 1e-9);
    if (law.is_point_mass()) {
      EXPECT_NEAR(offspring_mean(b), m, 1e-12);
      EXPECT_EQ(size_bias(b).pmf(), b.pmf());
    } else {
      EXPECT_GT(offspring_mean(b), m);
    }
  }
}

TEST(OffspringLaw, SamplingMatchesPmf) {
  const auto law = Offspring_law::poisson(2.0);
  auto rng = Rng{5};
  const auto n = 100'000;
  auto counts = std::vector<int>(law.max_count() + 1, 0);
  for (auto i = 0; i < n; ++i) ++counts[law.sample(rng)];
  for (auto k = 0; k <= 8; ++k) {
    const auto p = law.probability(k);
    EXPECT_NEAR(double(counts[k]) / n, p, 4.0 * std::sqrt(p * (1 - p) / n)) << "k=" << k;
  }
}

TEST(ValidateSpec, Examples) {
  auto spec = Model_spec{};
  spec.rate = Constant_rate{1.0};
  EXPECT_TRUE(validate_spec(spec).ok());
  EXPECT_TRUE(validate_spec(spec).warnings.empty());

  const auto tilted = validate_spec(brownian_spec(2.0));
  EXPECT_TRUE(tilted.ok());
  ASSERT_EQ(tilted.warnings.size(), 1u);
  EXPECT_TRUE(validate_spec(brownian_spec(1.0)).warnings.empty());

  spec.rate = Constant_rate{-1.0};
  const auto bad = validate_spec(spec);
  ASSERT_FALSE(bad.ok());
  EXPECT_EQ(bad.errors.front().rfind("model.rate.beta", 0), 0u);
  EXPECT_THROW(require_valid(spec), Error);
}

TEST(ValidateSpec, IncompatibleCombinations) {
  auto spec = Model_spec{};
  spec.zeta = Girsanov_weight{0.5};  // needs Brownian motion
  EXPECT_FALSE(validate_spec(spec).ok());

  spec = Model_spec{};
  spec.rate = State_rate_table{{1.0, 2.0}};  // needs a chain
  EXPECT_FALSE(validate_spec(spec).ok());

  spec.motion.kind = Two_state_chain{1.0, 0.0};
  EXPECT_FALSE(validate_spec(spec).ok());

  spec.motion.kind = Two_state_chain{1.0, 1.0};
  spec.motion.start = 2.0;
  EXPECT_FALSE(validate_spec(spec).ok());
  spec.motion.start = 1.0;
  EXPECT_TRUE(validate_spec(spec).ok());
}

TEST(ZetaEval, Examples) {
  auto one = Model_spec{};
  const auto flat = Path::constant(0.0, 0.0, 5.0);
  EXPECT_EQ(zeta_eval(one, flat.view(), 5.0), 1.0);

  const auto spec = brownian_spec(1.0);
  auto path = Path{Path_kind::sampled, 0.0, 0.0};
  path.append(1.0, -0.4);
  path.append(2.0, 3.0);
  EXPECT_EQ(zeta_eval(spec, path.view(), 0.0), 1.0);
  EXPECT_NEAR(zeta_eval(spec, path.view(), 2.0), std::exp(2.0), 1e-12);
  try {
    zeta_eval(spec, path.view(), 2.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error_kind::path_domain);
  }
}

// zeta(t) has mean one along ordinary motion paths; its reciprocal has mean one along the
// drifted paths of the matched spine sampler.
TEST(ZetaEval, MeanOneAlongMotionPaths) {
  for (const auto lambda : {0.0, 0.5, 1.0}) {
    const auto spec = brownian_spec(lambda);
    for (const auto t : {1.0, 2.0, 4.0}) {
      const auto n = 10'000;
      auto plain = std::vector<double>(n);
      auto tilted_inverse = std::vector<double>(n);
      const auto obs = std::vector<double>{t};
      for (auto i = 0; i < n; ++i) {
        for (const auto drift : {0.0, spec.spine_drift()}) {
          auto rng = Rng_handle{17, std::uint64_t(i), Stream_purpose::motion_only}.stream(drift == 0.0 ? 1 : 2);
          auto times = std::vector<double>{0.0};
          auto values = std::vector<double>{0.0};
          sample_motion(spec, drift, 0.0, 0.0, t, obs, rng, 99 + i, times, values);
          const auto view = Path_view{Path_kind::sampled, times, values, t};
          if (drift == 0.0) plain[i] = zeta_eval(spec, view, t);
          if (drift == spec.spine_drift()) tilted_inverse[i] = 1.0 / zeta_eval(spec, view, t);
        }
      }
      for (const auto* sample : {&plain, &tilted_inverse}) {
        const auto mean = std::accumulate(sample->begin(), sample->end(), 0.0) / n;
        auto ss = 0.0;
        for (const auto x : *sample) ss += (x - mean) * (x - mean);
        const auto se = std::sqrt(ss / (n - 1) / n);
        if (lambda == 0.0) {
          EXPECT_EQ(mean, 1.0);
        } else {
          EXPECT_LE(std::abs(mean - 1.0), 4.0 * se) << "lambda=" << lambda << " t=" << t;
        }
      }
    }
  }
}

TEST(ModelSpec, DerivedQuantities) {
  auto spec = brownian_spec(0.5);
  spec.motion.kind = Brownian_motion{2.0};
  spec.offspring = Offspring_law::poisson(3.0);
  EXPECT_NEAR(spec.branching_excess(), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(spec.spine_drift(), 0.5 * 4.0);
  EXPECT_EQ(spec.sigma(), 2.0);
}
