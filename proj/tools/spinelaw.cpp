#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spinelaw/config.hpp"
#include "spinelaw/csv.hpp"
#include "spinelaw/experiments.hpp"
#include "spinelaw/parallel.hpp"
#include "spinelaw/verify.hpp"

namespace {

using namespace spinelaw;

constexpr int k_exit_ok = 0;
constexpr int k_exit_check_failed = 1;
constexpr int k_exit_config = 2;
constexpr int k_exit_io = 3;

auto exit_code_for(const Error& e) -> int {
  switch (e.kind()) {
    case Error_kind::config:
    case Error_kind::invalid_model:
      return k_exit_config;
    case Error_kind::io:
      return k_exit_io;
    default:
      return k_exit_check_failed;
  }
}

struct Run_args {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<unsigned> threads;
};

auto run_command(const Run_args& args) -> int {
  auto cfg = parse_config(args.config);
  if (args.seed) cfg.master_seed = *args.seed;
  if (args.reps) {
    if (*args.reps < 1) throw Error{Error_kind::config, "--reps: must be >= 1"};
    cfg.reps = *args.reps;
  }
  const auto threads = resolve_thread_count(args.threads);

  const auto echo = serialize_config(cfg);
  std::cout << "# effective configuration\n";
  for (auto pos = std::size_t{0}; pos < echo.size();) {
    const auto end = echo.find('\n', pos);
    const auto line = echo.substr(pos, end - pos);
    std::cout << (line.empty() ? "#" : "# " + line) << '\n';
    pos = end == std::string::npos ? echo.size() : end + 1;
  }

  const auto result = run_experiment(cfg, threads);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

  std::error_code ec;
  std::filesystem::create_directories(args.out, ec);
  if (ec) throw Error{Error_kind::io, fmt::format("cannot create {}: {}", args.out, ec.message())};
  const auto dir = std::filesystem::path{args.out};
  write_series_file((dir / "series.csv").string(), result.series);
  write_summary_file((dir / "summary.csv").string(), result.summary);
  {
    auto file = std::ofstream{dir / "config.cfg", std::ios::binary | std::ios::trunc};
    file << echo;
    if (!file) throw Error{Error_kind::io, fmt::format("cannot write {}", (dir / "config.cfg").string())};
  }

  const auto breaches = breached_rows(result);
  auto failed = false;
  for (const auto& row : result.summary) {
    if (row.insufficient) {
      std::cout << fmt::format("t={} {}: InsufficientData (used_reps={}, no standard error)\n", row.t, row.estimator,
                               row.used_reps);
      continue;
    }
    if (!row.checked) continue;
    const auto breach = std::find(breaches.begin(), breaches.end(), &row) != breaches.end();
    failed = failed || breach;
    std::cout << fmt::format("t={} {}: {} mean={} oracle={} z={}\n", row.t, row.estimator, breach ? "FAIL" : "PASS",
                             format_double(row.mean), format_double(row.oracle), format_double(row.z));
  }
  return failed ? k_exit_check_failed : k_exit_ok;
}

struct Verify_args {
  std::string out;
  std::optional<unsigned> threads;
  unsigned alt_threads = 0;
  std::uint64_t seed = 0;
  double tolerance_scale = 1.0;
  std::vector<int> only;
};

auto verify_command(const Verify_args& args) -> int {
  auto options = Verify_options{};
  options.out_dir = args.out;
  options.threads = resolve_thread_count(args.threads);
  options.alt_threads = args.alt_threads;
  options.seed = args.seed;
  options.tolerance_scale = args.tolerance_scale;
  options.only = args.only;
  const auto report = run_verify(options, &std::cout);
  const auto passed = report.passed();
  std::cout << (passed ? "verify: all criteria passed\n" : "verify: FAILED\n");
  return passed ? k_exit_ok : k_exit_check_failed;
}

void list_models() {
  std::cout << R"(motions (model.motion):
  none                    single state 0
  two_state:q01,q10       two-state chain with jump rates 0->1 and 1->0
  brownian:sigma          X(t) = x0 + sigma B(t), sampled on a grid of step model.path_step
rates (model.rate):
  constant:beta
  table:r0,r1             rate by chain state
offspring laws (model.offspring):
  deterministic:k  two_point:p0 (mass p0 at 0, 1-p0 at 2)  geometric:p  poisson:mu  table:p0,p1,...
spine weights (model.zeta):
  one                     unit weight, spine moves as an ordinary particle
  girsanov:lambda         exp(lambda (X(t)-X(0)) - lambda^2 sigma^2 t / 2), spine drift lambda sigma^2
functionals (functional.kind):
  one  birth_rate (target, epsilon)  occupation (h, g = identity|square|window:lo,hi)  terminal_speed (speed, epsilon)
experiments (experiment.kind):
  birth_rate  occupation  bbm_tilt  mean_one  many_to_one  spine_posterior (experiment.tally = births_le:k | state_eq:s)
)";
}

}  // namespace

int main(int argc, char** argv) {
  auto app = CLI::App{"Simulation of branching Markov processes and their spine decompositions"};
  app.require_subcommand(1);

  auto run_args = Run_args{};
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("--config", run_args.config, "Config file")->required();
  run->add_option("--out", run_args.out, "Output directory")->required();
  run->add_option("--seed", run_args.seed, "Master seed (overrides experiment.seed)");
  run->add_option("--reps", run_args.reps, "Replications (overrides experiment.reps)");
  run->add_option("--threads", run_args.threads, "Worker threads (default: SPINELAW_THREADS, then all cores)")
      ->check(CLI::PositiveNumber);

  auto verify_args = Verify_args{};
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--out", verify_args.out, "Directory for the suite's CSV outputs");
  verify->add_option("--threads", verify_args.threads, "Worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--alt-threads", verify_args.alt_threads, "Thread count of the determinism rerun");
  verify->add_option("--seed", verify_args.seed, "Master seed");
  verify->add_option("--only", verify_args.only, "Criterion ids to run")->delimiter(',');
  verify->add_option("--tolerance-scale", verify_args.tolerance_scale, "Multiplier on every statistical tolerance");

  auto* list = app.add_subcommand("list-models", "Print the model vocabulary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return k_exit_config;
  }

  try {
    if (*run) return run_command(run_args);
    if (*verify) return verify_command(verify_args);
    if (*list) {
      list_models();
      return k_exit_ok;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return k_exit_check_failed;
  }
  return k_exit_ok;
}
