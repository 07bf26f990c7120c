#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "spinelaw/error.hpp"
#include "spinelaw/rng.hpp"
#include "spinelaw/stats.hpp"

using namespace spinelaw;

TEST(Summarize, ConstantSample) {
  const auto values = std::vector<double>(50, 0.25);
  const auto s = summarize(values, 0.25);
  EXPECT_EQ(s.mean, 0.25);
  EXPECT_EQ(s.se, 0.0);
  EXPECT_EQ(s.ci_lo, 0.25);
  EXPECT_EQ(s.ci_hi, 0.25);
  ASSERT_TRUE(s.z);
  EXPECT_EQ(*s.z, 0.0);
  EXPECT_EQ(s.count, 50u);
  // Zero spread against a different oracle has no finite z.
  EXPECT_FALSE(summarize(values, 0.3).z);
}

TEST(Summarize, ZeroOneSample) {
  const auto s = summarize(std::vector<double>{0.0, 1.0}, 0.0);
  EXPECT_DOUBLE_EQ(s.mean, 0.5);
  // sample sd = sqrt(0.5), se = sd / sqrt(2) = 0.5
  EXPECT_DOUBLE_EQ(s.se, 0.5);
  EXPECT_DOUBLE_EQ(s.ci_lo, 0.5 - 0.98);
  EXPECT_DOUBLE_EQ(s.ci_hi, 0.5 + 0.98);
  EXPECT_DOUBLE_EQ(*s.z, 1.0);
}

TEST(Summarize, InsufficientData) {
  for (const auto& values : {std::vector<double>{}, std::vector<double>{1.0}}) {
    try {
      summarize(values);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), Error_kind::insufficient_data);
    }
  }
  EXPECT_EQ(mean_of(std::vector<double>{3.0}), 3.0);
  EXPECT_THROW(mean_of(std::vector<double>{}), Error);
}

TEST(Summarize, CompensatedMean) {
  auto values = std::vector<double>{1e16};
  values.insert(values.end(), 1000, 1.0);
  values.push_back(-1e16);
  EXPECT_DOUBLE_EQ(mean_of(values), 1000.0 / 1002.0);
}

// About 95% of intervals built from uniform samples should cover 1/2.
TEST(Summarize, IntervalCoverage) {
  auto covered = 0;
  const auto trials = 2000;
  for (auto trial = 0; trial < trials; ++trial) {
    auto rng = Rng{std::uint64_t(trial) + 17};
    auto values = std::vector<double>(200);
    for (auto& v : values) v = rng.uniform();
    const auto s = summarize(values);
    covered += s.ci_lo <= 0.5 && 0.5 <= s.ci_hi;
  }
  const auto rate = double(covered) / trials;
  // binomial sd at p = 0.95 with 2000 trials is about 0.005
  EXPECT_NEAR(rate, 0.95, 0.02);
}

TEST(TwoSampleZ, Examples) {
  auto a = Summary{};
  a.mean = 1.0;
  a.se = 0.3;
  auto b = Summary{};
  b.mean = 0.5;
  b.se = 0.4;
  EXPECT_DOUBLE_EQ(two_sample_z(a, b), 1.0);
  EXPECT_DOUBLE_EQ(two_sample_z(b, a), -1.0);
  a.se = b.se = 0.0;
  EXPECT_TRUE(std::isinf(two_sample_z(a, b)));
  b.mean = 1.0;
  EXPECT_EQ(two_sample_z(a, b), 0.0);
}
