#include "spinelaw/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <tuple>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "spinelaw/config.hpp"
#include "spinelaw/csv.hpp"
#include "spinelaw/sim_p.hpp"

namespace spinelaw {

namespace {

constexpr auto k_mean_one = R"(# Mean-one martingale, binary splitting at rate 1.
[experiment]
kind = mean_one
reps = 10000
grid = 1,2,4
[model]
rate = constant:1
offspring = deterministic:2
)";

constexpr auto k_many_to_one = R"(# Weighted birth-rate indicator against the Poisson oracle and the spine-only estimator.
[experiment]
kind = many_to_one
reps = 10000
grid = 2,4,8
[model]
rate = constant:1
offspring = deterministic:2
[functional]
kind = birth_rate
target = 2
epsilon = 0.5
)";

constexpr auto k_spine_births = R"(# Spine tally vs posterior average, tally = spine birth count <= 2.
[experiment]
kind = spine_posterior
reps = 10000
grid = 2
tally = births_le:2
[model]
rate = constant:1
offspring = deterministic:2
)";

constexpr auto k_spine_state = R"(# Spine tally vs posterior average, tally = terminal state is 1.
[experiment]
kind = spine_posterior
reps = 10000
grid = 2
tally = state_eq:1
[model]
motion = two_state:1,1
start = 0
rate = constant:1
offspring = deterministic:2
)";

constexpr auto k_birth_rate = R"(# Birth-rate example on the default grid.
[experiment]
kind = birth_rate
reps = 1000
grid = 2,4,8,12
[caps]
max_particles = 4000000
[model]
rate = constant:1
offspring = deterministic:2
[functional]
kind = birth_rate
target = 2
epsilon = 0.5
)";

constexpr auto k_occupation_identity = R"(# Occupation example, g = identity. Slow branching keeps t = 16 cheap.
[experiment]
kind = occupation
reps = 10000
grid = 4,8,16
[model]
motion = two_state:1,3
start = 0
rate = constant:0.25
offspring = deterministic:2
[functional]
kind = occupation
h = 0,1
g = identity
)";

constexpr auto k_occupation_square = R"(# Occupation example, g = square.
[experiment]
kind = occupation
reps = 10000
grid = 4,8,16
[model]
motion = two_state:1,3
start = 0
rate = constant:0.25
offspring = deterministic:2
[functional]
kind = occupation
h = 0,1
g = square
)";

constexpr auto k_tilt_sub = R"(# Girsanov tilt below the threshold: lambda^2/2 < (m-1) beta.
[experiment]
kind = bbm_tilt
reps = 10000
grid = 2,4
[model]
motion = brownian:1
path_step = 0.05
rate = constant:1
offspring = deterministic:2
zeta = girsanov:0.5
[functional]
kind = terminal_speed
speed = 0.5
epsilon = 0.3
)";

constexpr auto k_tilt_super = R"(# Girsanov tilt above the threshold; Z(t) should collapse.
[experiment]
kind = bbm_tilt
reps = 1000
grid = 2,8
[model]
motion = brownian:1
path_step = 0.1
rate = constant:1
offspring = deterministic:2
zeta = girsanov:2
[functional]
kind = terminal_speed
speed = 2
epsilon = 0.3
)";

auto find_row(const Experiment_result& r, std::string_view estimator, double t) -> const Summary_row& {
  for (const auto& row : r.summary) {
    if (row.estimator == estimator && row.t == t) return row;
  }
  throw Error{Error_kind::insufficient_data, fmt::format("no {} row at t={}", estimator, t)};
}

auto fmt_opt(std::optional<double> x) -> std::string { return x ? fmt::format("{:.4g}", *x) : std::string{"-"}; }

auto row_brief(const Summary_row& r) -> std::string {
  return fmt::format("{}@{}: mean={} se={} oracle={} z={}", r.estimator, r.t, fmt_opt(r.mean), fmt_opt(r.se),
                     fmt_opt(r.oracle), fmt_opt(r.z));
}

// Typical size of Z(t); reported next to the mean, which heavy tails keep near 1.
auto median_z(const Experiment_result& r, double t) -> double {
  auto zs = std::vector<double>{};
  for (const auto& row : r.series) {
    if (row.t == t && row.z) zs.push_back(*row.z);
  }
  if (zs.empty()) return NAN;
  const auto mid = zs.begin() + static_cast<std::ptrdiff_t>(zs.size() / 2);
  std::nth_element(zs.begin(), mid, zs.end());
  return *mid;
}

class Suite {
 public:
  Suite(const Verify_options& options, unsigned threads) : options_{options}, threads_{threads} {}

  auto files() -> std::map<std::string, std::string>& { return files_; }

  auto config(std::string_view stem) const -> Experiment_config {
    auto cfg = parse_config_text(acceptance_configs().at(std::string{stem}));
    cfg.master_seed = options_.seed;
    return cfg;
  }

  auto run(std::string_view stem) -> Experiment_result {
    const auto result = run_experiment(config(stem), threads_);
    auto series = std::ostringstream{};
    write_series(series, result.series);
    auto summary = std::ostringstream{};
    write_summary(summary, result.summary);
    files_[fmt::format("{}/series.csv", stem)] = series.str();
    files_[fmt::format("{}/summary.csv", stem)] = summary.str();
    return result;
  }

  void add_summary(std::string_view stem, const std::vector<Summary_row>& rows) {
    auto summary = std::ostringstream{};
    write_summary(summary, rows);
    files_[fmt::format("{}/summary.csv", stem)] = summary.str();
  }

  auto z_max() const -> double { return 4.0 * options_.tolerance_scale; }
  auto scale() const -> double { return options_.tolerance_scale; }

  // Checked rows within z_max and truncation under 5%.
  auto standard_checks(const Experiment_result& r, std::vector<std::string>& notes) const -> bool {
    auto ok = true;
    for (const auto* row : breached_rows(r, z_max())) {
      ok = false;
      notes.push_back("breach " + row_brief(*row));
    }
    for (const auto& row : r.summary) {
      if (row.checked && row.insufficient) {
        ok = false;
        notes.push_back(fmt::format("{}@{}: insufficient data", row.estimator, row.t));
      }
      if (row.trunc_rate >= 0.05) {
        ok = false;
        notes.push_back(fmt::format("{}@{}: truncation rate {:.3g}", row.estimator, row.t, row.trunc_rate));
      }
    }
    return ok;
  }

 private:
  const Verify_options& options_;
  unsigned threads_;
  std::map<std::string, std::string> files_;
};

auto join_notes(const std::vector<std::string>& notes) -> std::string { return fmt::format("{}", fmt::join(notes, "; ")); }

auto criterion_mean_one(Suite& s) -> Criterion_result {
  auto c = Criterion_result{1, "mean-one martingale"};
  const auto r = s.run("mean_one");
  auto notes = std::vector<std::string>{};
  c.passed = s.standard_checks(r, notes);
  for (const auto& row : r.summary) {
    if (row.se && *row.se > 0.01 * s.scale()) {
      c.passed = false;
      notes.push_back(fmt::format("Z@{}: se {:.4g} > {:.4g}", row.t, *row.se, 0.01 * s.scale()));
    }
    notes.push_back(row_brief(row));
  }
  c.detail = join_notes(notes);
  return c;
}

auto criterion_death_time(Suite& s, std::uint64_t seed) -> Criterion_result {
  auto c = Criterion_result{2, "death-time law"};
  auto spec = Model_spec{};
  spec.rate = Constant_rate{1.0};
  const auto est = root_lifetime_law_check(spec, 100'000, 1.0, seed);
  auto row = Summary_row{};
  row.t = 1.0;
  row.estimator = "root_survival";
  row.mean = est.survival;
  row.se = est.standard_error;
  row.ci_lo = est.survival - 1.96 * est.standard_error;
  row.ci_hi = est.survival + 1.96 * est.standard_error;
  row.oracle = std::exp(-1.0);
  row.z = (est.survival - *row.oracle) / est.standard_error;
  row.used_reps = est.reps;
  s.add_summary("death_time", {row});
  c.passed = std::abs(*row.z) <= s.z_max();
  c.detail = row_brief(row);
  return c;
}

auto criterion_size_bias(Suite& s) -> Criterion_result {
  auto c = Criterion_result{3, "size-biasing exactness"};
  auto rows = std::vector<Summary_row>{};
  auto add = [&](std::string name, double diff, double tolerance) {
    auto row = Summary_row{};
    row.estimator = std::move(name);
    row.mean = diff;
    row.oracle = 0.0;
    row.used_reps = 1;
    rows.push_back(row);
    return diff <= tolerance;
  };

  const auto biased = size_bias(Offspring_law::two_point(0.5));
  auto diff = std::abs(biased.probability(2) - 1.0);
  for (auto k = std::size_t{0}; k <= std::max<std::size_t>(biased.max_count(), 2); ++k) {
    if (k != 2) diff = std::max(diff, std::abs(biased.probability(k)));
  }
  c.passed = add("two_point_vs_delta2", diff, std::numeric_limits<double>::epsilon() * s.scale());

  for (const auto mu : {0.5, 3.0, 20.0}) {
    const auto law = Offspring_law::poisson(mu);
    const auto sb = size_bias(law);
    auto worst = 0.0;
    for (auto k = std::size_t{0}; k <= 200; ++k) {
      const auto pmf = k == 0 ? std::exp(-mu)
                              : std::exp(static_cast<double>(k) * std::log(mu) - mu - std::lgamma(static_cast<double>(k) + 1.0));
      worst = std::max(worst, std::abs(sb.probability(k) - static_cast<double>(k) * pmf / mu));
    }
    c.passed = add(fmt::format("poisson_{}_vs_formula", mu), worst, 1e-12 * s.scale()) && c.passed;
  }
  s.add_summary("size_bias", rows);
  auto notes = std::vector<std::string>{};
  for (const auto& row : rows) notes.push_back(fmt::format("{}: max|diff|={:.3g}", row.estimator, *row.mean));
  c.detail = join_notes(notes);
  return c;
}

auto criterion_many_to_one(Suite& s) -> Criterion_result {
  auto c = Criterion_result{4, "many-to-one / Poisson oracle"};
  const auto r = s.run("many_to_one");
  auto notes = std::vector<std::string>{};
  c.passed = s.standard_checks(r, notes);
  for (const auto& row : r.summary) notes.push_back(row_brief(row));
  c.detail = join_notes(notes);
  return c;
}

auto criterion_spine_posterior(Suite& s) -> Criterion_result {
  auto c = Criterion_result{5, "spine-posterior identity"};
  auto notes = std::vector<std::string>{};
  c.passed = true;
  for (const auto* stem : {"spine_births", "spine_state"}) {
    const auto r = s.run(stem);
    c.passed = s.standard_checks(r, notes) && c.passed;
    for (const auto& row : r.summary) notes.push_back(fmt::format("{} {}", stem, row_brief(row)));
  }
  c.detail = join_notes(notes);
  return c;
}

auto criterion_birth_rate(Suite& s) -> Criterion_result {
  auto c = Criterion_result{6, "birth-rate trend"};
  const auto cfg = s.config("birth_rate");
  const auto r = s.run("birth_rate");
  auto notes = std::vector<std::string>{};
  c.passed = s.standard_checks(r, notes);
  for (auto i = std::size_t{0}; i < cfg.grid.size(); ++i) {
    for (auto j = i + 1; j < cfg.grid.size(); ++j) {
      const auto& a = find_row(r, "star", cfg.grid[i]);
      const auto& b = find_row(r, "star", cfg.grid[j]);
      if (!a.mean || !b.mean || !a.se || !b.se) {
        c.passed = false;
        continue;
      }
      const auto slack = 2.0 * s.scale() * std::sqrt(*a.se * *a.se + *b.se * *b.se);
      if (*b.mean < *a.mean - slack) {
        c.passed = false;
        notes.push_back(fmt::format("star decreases from t={} to t={}", a.t, b.t));
      }
    }
  }
  for (const auto& row : r.summary) {
    if (row.estimator != "Z") notes.push_back(row_brief(row));
  }
  c.detail = join_notes(notes);
  return c;
}

auto criterion_occupation(Suite& s) -> Criterion_result {
  auto c = Criterion_result{7, "occupation oracle"};
  auto notes = std::vector<std::string>{};
  c.passed = true;
  const auto cases = {std::tuple{"occupation_identity", 0.25, 0.02}, std::tuple{"occupation_square", 0.0625, 0.01}};
  for (const auto& [stem, oracle, floor] : cases) {
    const auto r = s.run(stem);
    c.passed = s.standard_checks(r, notes) && c.passed;
    const auto& row = find_row(r, "star", 16.0);
    const auto tolerance = std::max(4.0 * row.se.value_or(0.0), floor) * s.scale();
    const auto gap = row.mean ? std::abs(*row.mean - oracle) : INFINITY;
    if (!(gap <= tolerance)) c.passed = false;
    notes.push_back(fmt::format("{}: star@16 mean={:.5g} se={} limit={} |gap|={:.3g} tol={:.3g}", stem,
                                row.mean.value_or(NAN), fmt_opt(row.se), oracle, gap, tolerance));
  }
  c.detail = join_notes(notes);
  return c;
}

auto criterion_tilt(Suite& s) -> Criterion_result {
  auto c = Criterion_result{8, "Girsanov regimes"};
  auto notes = std::vector<std::string>{};
  c.passed = true;
  const auto sub = s.run("tilt_sub");
  for (const auto t : {2.0, 4.0}) {
    const auto& row = find_row(sub, "Z", t);
    if (!row.z || std::abs(*row.z) > s.z_max()) c.passed = false;
    notes.push_back("lambda=0.5 " + row_brief(row));
  }
  for (const auto& row : sub.summary) {
    if (row.trunc_rate >= 0.05) c.passed = false;
  }
  const auto super = s.run("tilt_super");
  const auto& z2 = find_row(super, "Z", 2.0);
  const auto& z8 = find_row(super, "Z", 8.0);
  if (!z2.mean || !z8.mean || !(*z8.mean < *z2.mean) || !(*z8.mean < 0.1)) c.passed = false;
  if (z8.trunc_rate >= 0.05) c.passed = false;
  notes.push_back(fmt::format("lambda=2 mean Z(2)={} mean Z(8)={} median Z(8)={:.4g}", fmt_opt(z2.mean), fmt_opt(z8.mean),
                              median_z(super, 8.0)));
  c.detail = join_notes(notes);
  return c;
}

auto wanted(const Verify_options& o, int id) -> bool {
  return o.only.empty() || std::find(o.only.begin(), o.only.end(), id) != o.only.end();
}

auto run_suite(const Verify_options& options, unsigned threads, std::ostream* log, bool all)
    -> std::pair<std::vector<Criterion_result>, std::map<std::string, std::string>> {
  auto suite = Suite{options, threads};
  auto out = std::vector<Criterion_result>{};
  auto step = [&](int id, auto&& body) {
    if (!all && !wanted(options, id)) return;
    auto c = Criterion_result{};
    try {
      c = body();
    } catch (const std::exception& e) {
      c = Criterion_result{id, "error", false, e.what()};
    }
    if (log) *log << format_criterion(c) << std::endl;
    out.push_back(std::move(c));
  };
  step(1, [&] { return criterion_mean_one(suite); });
  step(2, [&] { return criterion_death_time(suite, options.seed); });
  step(3, [&] { return criterion_size_bias(suite); });
  step(4, [&] { return criterion_many_to_one(suite); });
  step(5, [&] { return criterion_spine_posterior(suite); });
  step(6, [&] { return criterion_birth_rate(suite); });
  step(7, [&] { return criterion_occupation(suite); });
  step(8, [&] { return criterion_tilt(suite); });
  return {std::move(out), std::move(suite.files())};
}

void write_files(const std::string& dir, const std::map<std::string, std::string>& files) {
  for (const auto& [name, bytes] : files) {
    const auto path = std::filesystem::path{dir} / name;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error{Error_kind::io, fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message())};
    auto file = std::ofstream{path, std::ios::binary | std::ios::trunc};
    file << bytes;
    if (!file) throw Error{Error_kind::io, fmt::format("cannot write {}", path.string())};
  }
}

}  // namespace

auto acceptance_configs() -> std::map<std::string, std::string> {
  return {{"mean_one", k_mean_one},
          {"many_to_one", k_many_to_one},
          {"spine_births", k_spine_births},
          {"spine_state", k_spine_state},
          {"birth_rate", k_birth_rate},
          {"occupation_identity", k_occupation_identity},
          {"occupation_square", k_occupation_square},
          {"tilt_sub", k_tilt_sub},
          {"tilt_super", k_tilt_super}};
}

auto Verify_report::passed() const -> bool {
  return !criteria.empty() && std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
}

auto format_criterion(const Criterion_result& c) -> std::string {
  return fmt::format("criterion {} {}: {} ({})", c.id, c.passed ? "PASS" : "FAIL", c.name, c.detail);
}

auto run_verify(const Verify_options& options, std::ostream* log) -> Verify_report {
  auto report = Verify_report{};
  const auto only_determinism = !options.only.empty() && std::all_of(options.only.begin(), options.only.end(),
                                                                     [](int id) { return id == 9; });
  auto [criteria, files] = run_suite(options, options.threads, only_determinism ? nullptr : log, only_determinism);
  if (!only_determinism) report.criteria = std::move(criteria);
  report.files = std::move(files);
  if (!options.out_dir.empty()) write_files(options.out_dir, report.files);

  if (wanted(options, 9)) {
    auto c = Criterion_result{9, "determinism across thread counts"};
    const auto alt = options.alt_threads != 0 ? options.alt_threads : options.threads + 1;
    try {
      const auto rerun = run_suite(options, alt, nullptr, only_determinism).second;
      auto differing = std::vector<std::string>{};
      for (const auto& [name, bytes] : report.files) {
        const auto it = rerun.find(name);
        if (it == rerun.end() || it->second != bytes) differing.push_back(name);
      }
      c.passed = differing.empty() && rerun.size() == report.files.size();
      c.detail = c.passed ? fmt::format("{} CSV files byte-identical with threads={} and threads={}", report.files.size(),
                                        options.threads, alt)
                          : fmt::format("differing: {}", fmt::join(differing, ", "));
    } catch (const std::exception& e) {
      c.detail = e.what();
    }
    if (log) *log << format_criterion(c) << std::endl;
    report.criteria.push_back(std::move(c));
  }
  return report;
}

}  // namespace spinelaw
