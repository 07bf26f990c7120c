#include <gtest/gtest.h>

#include <string>

#include "spinelaw/config.hpp"

using namespace spinelaw;

namespace {

auto config_error(std::string_view text) -> std::string {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error_kind::config);
    return e.what();
  }
  ADD_FAILURE() << "accepted:\n" << text;
  return {};
}

auto contains(const std::string& haystack, std::string_view needle) -> ::testing::AssertionResult {
  if (haystack.find(needle) != std::string::npos) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "'" << haystack << "' lacks '" << needle << "'";
}

}  // namespace

TEST(Config, MinimalBirthRateDefaults) {
  const auto cfg = parse_config_text("experiment.kind = birth_rate\n");
  EXPECT_EQ(cfg.kind, Experiment_kind::birth_rate);
  EXPECT_EQ(cfg.reps, 10'000u);
  EXPECT_EQ(cfg.master_seed, 0u);
  EXPECT_EQ(cfg.grid, (std::vector<double>{2, 4, 8, 12}));
  EXPECT_EQ(cfg.caps.horizon, 12.0);
  EXPECT_EQ(cfg.spec.mean_offspring(), 2.0);
  EXPECT_EQ(cfg.spec.rate.bound(), 1.0);
  const auto& f = std::get<Birth_rate_indicator>(cfg.functional);
  EXPECT_EQ(f.target, 2.0);
  EXPECT_EQ(f.epsilon, 0.5);
}

TEST(Config, FunctionalDefaultsFollowTheKind) {
  const auto occupation = parse_config_text(
      "[experiment]\nkind = occupation\n[model]\nmotion = two_state:1,3\nrate = constant:0.25\n");
  const auto& o = std::get<Occupation_average>(occupation.functional);
  EXPECT_EQ(o.h, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(o.g, Occupation_map::identity);
  EXPECT_EQ(occupation.grid, (std::vector<double>{4, 8, 16}));

  const auto tilt =
      parse_config_text("experiment.kind = bbm_tilt\nmodel.motion = brownian:2\nmodel.zeta = girsanov:0.5\n");
  const auto& s = std::get<Terminal_speed_indicator>(tilt.functional);
  EXPECT_DOUBLE_EQ(s.speed, 2.0);
  EXPECT_EQ(s.epsilon, 0.3);

  const auto spine = parse_config_text("experiment.kind = spine_posterior\nmodel.motion = two_state:1,1\n");
  EXPECT_EQ(spine.tally.kind, Spine_tally::Kind::state_equals);
  EXPECT_EQ(spine.tally.threshold, 1.0);
  EXPECT_TRUE(std::holds_alternative<Unit_functional>(spine.functional));
}

TEST(Config, FullSyntax) {
  const auto cfg = parse_config_text(R"(# a comment
; another
[experiment]
kind = many_to_one   # trailing comment
reps = 1e3
seed = 42
grid = 1, 2.5, 4

[caps]
max_particles = 5000
horizon = 6

[model]
start = 1
offspring = table:0.25,0.25,0.5
rate = table:0.5,2
motion = two_state:0.5,1.5
path_step = 0.2

[functional]
kind = occupation
h = 1,-1
g = window:0,0.5
)");
  EXPECT_EQ(cfg.kind, Experiment_kind::many_to_one);
  EXPECT_EQ(cfg.reps, 1000u);
  EXPECT_EQ(cfg.master_seed, 42u);
  EXPECT_EQ(cfg.grid, (std::vector<double>{1.0, 2.5, 4.0}));
  EXPECT_EQ(cfg.caps.max_particles, 5000u);
  EXPECT_EQ(cfg.caps.horizon, 6.0);
  EXPECT_EQ(cfg.spec.motion.start, 1.0);
  EXPECT_DOUBLE_EQ(cfg.spec.mean_offspring(), 1.25);
  EXPECT_EQ(cfg.spec.rate.at(1.0), 2.0);
  const auto& chain = std::get<Two_state_chain>(cfg.spec.motion.kind);
  EXPECT_EQ(chain.q01, 0.5);
  EXPECT_EQ(chain.q10, 1.5);
  const auto& o = std::get<Occupation_average>(cfg.functional);
  EXPECT_EQ(o.h, (std::vector<double>{1.0, -1.0}));
  EXPECT_EQ(o.g, Occupation_map::window);
  EXPECT_EQ(o.window_hi, 0.5);
}

TEST(Config, Errors) {
  EXPECT_TRUE(contains(config_error("experiment.kind = mean_one\nmodel.rate = constant:-1\n"), "line 2: model.rate"));
  EXPECT_TRUE(contains(config_error("experiment.kind = mean_one\nmodel.colour = red\n"), "line 2: model.colour: unknown key"));
  EXPECT_TRUE(contains(config_error("experiment.kind = mean_one\n" "experiment.reps = 5\nexperiment.reps = 6\n"), "line 3: experiment.reps: already set on line 2"));
  EXPECT_TRUE(contains(config_error("experiment.kind = mean_one\n" "experiment.reps =\n"), "empty value"));
  EXPECT_TRUE(contains(config_error("experiment.kind = mean_one\n" "experiment.reps = 2.5\n"), "experiment.reps"));
  EXPECT_TRUE(contains(config_error("experiment.kind = teleport\n"), "experiment.kind"));
  EXPECT_TRUE(contains(config_error("[model\n"), "line 1: malformed section header"));
  EXPECT_TRUE(contains(config_error("just words\n"), "line 1: expected key = value"));
  EXPECT_TRUE(contains(config_error("experiment.kind = mean_one\n" "model.offspring = poisson:150\n"), "model.offspring"));
  EXPECT_TRUE(contains(config_error("experiment.kind = birth_rate\nfunctional.h = 0,1\n"), "functional.h"));
  EXPECT_TRUE(contains(config_error("experiment.kind = mean_one\nexperiment.tally = births_le:2\n"), "experiment.tally"));
  EXPECT_TRUE(contains(config_error("experiment.kind = birth_rate\nfunctional.target = 3\n"), "functional.target"));
  EXPECT_TRUE(contains(config_error("experiment.kind = mean_one\n" "experiment.grid = 1,x\n"), "experiment.grid"));
}

TEST(Config, MissingFile) {
  try {
    parse_config("/nonexistent/spinelaw.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error_kind::config);
    EXPECT_TRUE(contains(e.what(), "/nonexistent/spinelaw.cfg"));
  }
}

TEST(Config, SerializeRoundTrip) {
  const auto texts = {
      std::string{"experiment.kind = birth_rate\nexperiment.reps = 77\nexperiment.seed = 9\n"},
      std::string{"experiment.kind = occupation\nmodel.motion = two_state:1,3\nmodel.rate = table:0.25,1\n"
                  "functional.g = square\nfunctional.h = 0.5,1\n"},
      std::string{"experiment.kind = bbm_tilt\nmodel.motion = brownian:1.5\nmodel.zeta = girsanov:0.3\n"
                  "model.path_step = 0.01\nexperiment.z_floor = 1e-3\nfunctional.epsilon = 0.2\n"},
      std::string{"experiment.kind = spine_posterior\nexperiment.tally = births_le:3\nmodel.offspring = geometric:0.4\n"},
      std::string{"experiment.kind = many_to_one\nmodel.offspring = poisson:2.5\nfunctional.kind = birth_rate\n"
                  "functional.target = 2.5\nexperiment.grid = 0.5,1\n"},
  };
  for (const auto& text : texts) {
    const auto once = serialize_config(parse_config_text(text));
    EXPECT_EQ(serialize_config(parse_config_text(once)), once) << once;
  }
}
