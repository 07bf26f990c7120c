#include <gtest/gtest.h>

#include <cmath>
#include <tuple>

#include "oracles.hpp"
#include "spinelaw/exact.hpp"

using namespace spinelaw;

TEST(Exact, PoissonCdf) {
  for (const auto mean : {0.1, 2.0, 16.0, 48.0}) {
    for (const auto k : {0u, 1u, 5u, 20u, 60u}) {
      EXPECT_NEAR(exact::poisson_cdf(mean, k), oracle::poisson_cdf(mean, k), 1e-12) << mean << " " << k;
    }
  }
}

TEST(Exact, PoissonWindow) {
  struct Case {
    double mean, t, target, eps;
  };
  for (const auto c : {Case{4.0, 2.0, 2.0, 0.5}, Case{8.0, 4.0, 2.0, 0.5}, Case{16.0, 8.0, 2.0, 0.5},
                       Case{24.0, 12.0, 2.0, 0.5}, Case{6.0, 3.0, 1.0, 0.25}, Case{10.0, 4.0, 2.5, 0.125}}) {
    EXPECT_NEAR(exact::poisson_window_probability(c.mean, c.t, c.target, c.eps),
                oracle::poisson_window(c.mean, c.t, c.target, c.eps), 1e-12)
        << c.mean << " " << c.t;
  }
}

// Boundary counts sit exactly on |k/t - target| = eps and are excluded.
TEST(Exact, PoissonWindowBoundary) {
  // t = 2, target 2, eps 0.5: only k = 4 is strictly inside (k = 3, 5 are on the boundary).
  EXPECT_NEAR(exact::poisson_window_probability(4.0, 2.0, 2.0, 0.5), oracle::poisson_pmf(4.0, 4), 1e-14);
}

TEST(Exact, GaussianWindow) {
  for (const auto [drift, sigma, t, speed, eps] :
       {std::tuple{0.5, 1.0, 2.0, 0.5, 0.3}, std::tuple{2.0, 1.0, 8.0, 2.0, 0.3},
        std::tuple{0.0, 2.0, 3.0, 1.0, 0.2}}) {
    const auto sd = sigma * std::sqrt(t);
    const auto expected = oracle::normal_cdf((t * (speed + eps) - drift * t) / sd) -
                          oracle::normal_cdf((t * (speed - eps) - drift * t) / sd);
    EXPECT_NEAR(exact::gaussian_window_probability(drift, sigma, t, speed, eps), expected, 1e-13);
  }
}

TEST(Exact, ChainLaws) {
  for (const auto [q01, q10] : {std::pair{1.0, 3.0}, std::pair{1.0, 1.0}, std::pair{0.2, 5.0}}) {
    const auto chain = Two_state_chain{q01, q10};
    const auto pi = exact::stationary_law(chain);
    const auto ref = oracle::chain_stationary(q01, q10);
    EXPECT_NEAR(pi[0], ref(0), 1e-12);
    EXPECT_NEAR(pi[1], ref(1), 1e-12);
    for (const auto start : {0, 1}) {
      for (const auto t : {0.0, 0.3, 2.0, 16.0}) {
        EXPECT_NEAR(exact::chain_state_one_probability(chain, start, t), oracle::chain_transition(q01, q10, t, start, 1),
                    1e-12);
      }
      for (const auto t : {0.3, 2.0, 16.0}) {
        EXPECT_NEAR(exact::chain_occupation_mean(chain, start, t), oracle::chain_occupation(q01, q10, t, start), 1e-9);
      }
    }
  }
}
