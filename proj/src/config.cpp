#include "spinelaw/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

namespace spinelaw {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

using Entries = std::map<std::string, Entry, std::less<>>;

const auto k_known_keys = std::vector<std::string_view>{
    "experiment.kind", "experiment.reps",   "experiment.seed",   "experiment.grid",   "experiment.tally",
    "experiment.z_floor", "caps.max_particles", "caps.horizon",  "model.motion",      "model.start",
    "model.path_step", "model.rate",        "model.offspring",   "model.zeta",        "functional.kind",
    "functional.target", "functional.epsilon", "functional.h",   "functional.g",      "functional.speed"};

auto trim(std::string_view s) -> std::string_view {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class Reader {
 public:
  explicit Reader(Entries entries) : entries_{std::move(entries)} {}

  auto has(std::string_view key) const -> bool { return entries_.contains(key); }
  auto line(std::string_view key) const -> std::size_t {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    const auto l = line(key);
    if (l == 0) throw Error{Error_kind::config, fmt::format("{}: {}", key, message)};
    throw Error{Error_kind::config, fmt::format("line {}: {}: {}", l, key, message)};
  }

  auto text(std::string_view key) const -> std::optional<std::string> {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
  }

  auto number(std::string_view key, std::string_view token) const -> double {
    token = trim(token);
    auto value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) {
      fail(key, fmt::format("'{}' is not a finite number", token));
    }
    return value;
  }

  auto numbers(std::string_view key, std::string_view list) const -> std::vector<double> {
    auto out = std::vector<double>{};
    while (true) {
      const auto comma = list.find(',');
      out.push_back(number(key, list.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      list = list.substr(comma + 1);
    }
    return out;
  }

  auto number(std::string_view key) const -> std::optional<double> {
    const auto t = text(key);
    if (!t) return std::nullopt;
    return number(key, *t);
  }

  auto count(std::string_view key) const -> std::optional<std::uint64_t> {
    const auto t = text(key);
    if (!t) return std::nullopt;
    auto value = std::uint64_t{0};
    const auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), value);
    if (!t->empty() && ec == std::errc{} && ptr == t->data() + t->size()) return value;
    // Also accept integral scientific notation such as 1e6.
    const auto x = number(key, *t);
    if (x < 0 || x != std::floor(x) || x > 9.007199254740992e15) fail(key, fmt::format("'{}' is not a count", *t));
    return static_cast<std::uint64_t>(x);
  }

  // Splits "name:args" into name and argument list.
  auto variant(std::string_view key) const -> std::optional<std::pair<std::string, std::string>> {
    const auto t = text(key);
    if (!t) return std::nullopt;
    const auto colon = t->find(':');
    if (colon == std::string::npos) return std::pair{*t, std::string{}};
    return std::pair{std::string{trim(std::string_view{*t}.substr(0, colon))},
                     std::string{trim(std::string_view{*t}.substr(colon + 1))}};
  }

  auto arguments(std::string_view key, const std::string& args, std::size_t expected) const -> std::vector<double> {
    if (args.empty()) fail(key, fmt::format("expected {} argument(s)", expected));
    auto values = numbers(key, args);
    if (values.size() != expected) fail(key, fmt::format("expected {} argument(s), got {}", expected, values.size()));
    return values;
  }

 private:
  Entries entries_;
};

auto read_entries(std::string_view text) -> Entries {
  auto entries = Entries{};
  auto section = std::string{};
  auto number = std::size_t{0};
  auto stream = std::istringstream{std::string{text}};
  auto raw = std::string{};
  while (std::getline(stream, raw)) {
    ++number;
    auto line = std::string_view{raw};
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error{Error_kind::config, fmt::format("line {}: malformed section header", number)};
      section = std::string{trim(line.substr(1, line.size() - 2))};
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error{Error_kind::config, fmt::format("line {}: expected key = value", number)};
    }
    auto key = std::string{trim(line.substr(0, eq))};
    const auto value = std::string{trim(line.substr(eq + 1))};
    if (!section.empty()) key = section + "." + key;
    if (std::find(k_known_keys.begin(), k_known_keys.end(), key) == k_known_keys.end()) {
      throw Error{Error_kind::config, fmt::format("line {}: {}: unknown key", number, key)};
    }
    if (value.empty()) throw Error{Error_kind::config, fmt::format("line {}: {}: empty value", number, key)};
    if (const auto it = entries.find(key); it != entries.end()) {
      throw Error{Error_kind::config,
                  fmt::format("line {}: {}: already set on line {}", number, key, it->second.line)};
    }
    entries.emplace(std::move(key), Entry{value, number});
  }
  return entries;
}

void read_model(const Reader& in, Model_spec& spec) {
  if (const auto v = in.variant("model.motion")) {
    const auto& [name, args] = *v;
    if (name == "none") {
      spec.motion.kind = No_motion{};
    } else if (name == "two_state") {
      const auto q = in.arguments("model.motion", args, 2);
      spec.motion.kind = Two_state_chain{q[0], q[1]};
    } else if (name == "brownian") {
      spec.motion.kind = Brownian_motion{args.empty() ? 1.0 : in.arguments("model.motion", args, 1)[0]};
    } else {
      in.fail("model.motion", fmt::format("unknown motion '{}' (none, two_state:q01,q10, brownian:sigma)", name));
    }
  }
  if (const auto x = in.number("model.start")) spec.motion.start = *x;
  if (const auto x = in.number("model.path_step")) spec.motion.path_step = *x;
  if (const auto v = in.variant("model.rate")) {
    const auto& [name, args] = *v;
    if (name == "constant") {
      spec.rate = Constant_rate{in.arguments("model.rate", args, 1)[0]};
    } else if (name == "table") {
      if (args.empty()) in.fail("model.rate", "table needs one rate per state");
      spec.rate = State_rate_table{in.numbers("model.rate", args)};
    } else {
      in.fail("model.rate", fmt::format("unknown rate '{}' (constant:beta, table:r0,r1)", name));
    }
  }
  if (const auto v = in.variant("model.offspring")) {
    const auto& [name, args] = *v;
    try {
      if (name == "deterministic") {
        const auto k = in.arguments("model.offspring", args, 1)[0];
        if (k < 0 || k != std::floor(k) || k > 200) in.fail("model.offspring", "count must be an integer in [0, 200]");
        spec.offspring = Offspring_law::deterministic(static_cast<std::size_t>(k));
      } else if (name == "two_point") {
        spec.offspring = Offspring_law::two_point(in.arguments("model.offspring", args, 1)[0]);
      } else if (name == "geometric") {
        spec.offspring = Offspring_law::geometric(in.arguments("model.offspring", args, 1)[0]);
      } else if (name == "poisson") {
        spec.offspring = Offspring_law::poisson(in.arguments("model.offspring", args, 1)[0]);
      } else if (name == "table") {
        if (args.empty()) in.fail("model.offspring", "table needs probabilities p0,p1,...");
        spec.offspring = Offspring_law::tabulated(in.numbers("model.offspring", args));
      } else {
        in.fail("model.offspring",
                fmt::format("unknown law '{}' (deterministic:k, two_point:p0, geometric:p, poisson:mu, table:p0,...)", name));
      }
    } catch (const Error& e) {
      if (e.kind() == Error_kind::config) throw;
      const auto message = std::string_view{e.what()};
      in.fail("model.offspring", std::string{message.substr(message.find(": ") + 2)});
    }
  }
  if (const auto v = in.variant("model.zeta")) {
    const auto& [name, args] = *v;
    if (name == "one") {
      spec.zeta = Unit_weight{};
    } else if (name == "girsanov") {
      spec.zeta = Girsanov_weight{in.arguments("model.zeta", args, 1)[0]};
    } else {
      in.fail("model.zeta", fmt::format("unknown weight '{}' (one, girsanov:lambda)", name));
    }
  }
}

auto default_functional(Experiment_kind kind) -> std::string {
  switch (kind) {
    case Experiment_kind::birth_rate: return "birth_rate";
    case Experiment_kind::occupation: return "occupation";
    case Experiment_kind::bbm_tilt: return "terminal_speed";
    default: return "one";
  }
}

void read_functional(const Reader& in, Experiment_config& cfg) {
  const auto kind = in.text("functional.kind").value_or(default_functional(cfg.kind));
  auto allowed = std::vector<std::string_view>{};
  if (kind == "one") {
    cfg.functional = Unit_functional{};
  } else if (kind == "birth_rate") {
    auto f = Birth_rate_indicator{};
    try {
      f.target = cfg.spec.mean_offspring() * cfg.spec.rate.bound();
    } catch (const Error&) {
      f.target = 0.0;
    }
    f.epsilon = 0.5;
    if (const auto x = in.number("functional.target")) f.target = *x;
    if (const auto x = in.number("functional.epsilon")) f.epsilon = *x;
    cfg.functional = f;
    allowed = {"functional.target", "functional.epsilon"};
  } else if (kind == "occupation") {
    auto f = Occupation_average{};
    if (const auto t = in.text("functional.h")) f.h = in.numbers("functional.h", *t);
    if (const auto v = in.variant("functional.g")) {
      const auto& [name, args] = *v;
      if (name == "identity") {
        f.g = Occupation_map::identity;
      } else if (name == "square") {
        f.g = Occupation_map::square;
      } else if (name == "window") {
        const auto w = in.arguments("functional.g", args, 2);
        f.g = Occupation_map::window;
        f.window_lo = w[0];
        f.window_hi = w[1];
      } else {
        in.fail("functional.g", fmt::format("unknown map '{}' (identity, square, window:lo,hi)", name));
      }
    }
    cfg.functional = f;
    allowed = {"functional.h", "functional.g"};
  } else if (kind == "terminal_speed") {
    auto f = Terminal_speed_indicator{};
    f.speed = cfg.spec.motion.is_brownian() ? cfg.spec.spine_drift() : 0.0;
    f.epsilon = 0.3;
    if (const auto x = in.number("functional.speed")) f.speed = *x;
    if (const auto x = in.number("functional.epsilon")) f.epsilon = *x;
    cfg.functional = f;
    allowed = {"functional.speed", "functional.epsilon"};
  } else {
    in.fail("functional.kind", fmt::format("unknown functional '{}' (one, birth_rate, occupation, terminal_speed)", kind));
  }
  for (const auto key : {"functional.target", "functional.epsilon", "functional.h", "functional.g", "functional.speed"}) {
    if (in.has(key) && std::find(allowed.begin(), allowed.end(), std::string_view{key}) == allowed.end()) {
      in.fail(key, fmt::format("not a parameter of functional '{}'", kind));
    }
  }
}

// Maps a validation message "model.rate.beta: ..." to the config key it came from.
auto key_of(const std::string& message) -> std::string {
  const auto colon = message.find(':');
  auto field = message.substr(0, colon);
  const auto first = field.find('.');
  if (first == std::string::npos) return field;
  const auto second = field.find_first_of(".[", first + 1);
  return field.substr(0, second);
}

}  // namespace

auto parse_config_text(std::string_view text) -> Experiment_config {
  const auto in = Reader{read_entries(text)};
  auto cfg = Experiment_config{};

  const auto kind_text = in.text("experiment.kind");
  if (!kind_text) in.fail("experiment.kind", "missing (birth_rate, occupation, bbm_tilt, mean_one, many_to_one, spine_posterior)");
  const auto kind = parse_experiment_kind(*kind_text);
  if (!kind) in.fail("experiment.kind", fmt::format("unknown experiment '{}'", *kind_text));
  cfg.kind = *kind;

  read_model(in, cfg.spec);
  const auto report = validate_spec(cfg.spec);
  if (!report.ok()) in.fail(key_of(report.errors.front()), report.errors.front().substr(report.errors.front().find(':') + 2));

  if (const auto n = in.count("experiment.reps")) cfg.reps = *n;
  if (cfg.reps < 1) in.fail("experiment.reps", "must be >= 1");
  if (const auto n = in.count("experiment.seed")) cfg.master_seed = *n;
  if (const auto t = in.text("experiment.grid")) {
    cfg.grid = in.numbers("experiment.grid", *t);
  } else {
    cfg.grid = default_grid(cfg.spec);
  }
  for (auto k = std::size_t{1}; k < cfg.grid.size(); ++k) {
    if (!(cfg.grid[k] > cfg.grid[k - 1])) in.fail("experiment.grid", "times must be strictly increasing");
  }
  if (cfg.grid.front() < 0.0) in.fail("experiment.grid", "times must be >= 0");
  if (const auto v = in.variant("experiment.tally")) {
    const auto& [name, args] = *v;
    if (name == "births_le") {
      cfg.tally = Spine_tally{Spine_tally::Kind::births_at_most, in.arguments("experiment.tally", args, 1)[0]};
    } else if (name == "state_eq") {
      cfg.tally = Spine_tally{Spine_tally::Kind::state_equals, in.arguments("experiment.tally", args, 1)[0]};
    } else {
      in.fail("experiment.tally", fmt::format("unknown tally '{}' (births_le:k, state_eq:s)", name));
    }
  } else if (cfg.spec.motion.is_chain()) {
    cfg.tally = Spine_tally{Spine_tally::Kind::state_equals, 1.0};
  }
  if (in.has("experiment.tally") && cfg.kind != Experiment_kind::spine_posterior) {
    in.fail("experiment.tally", "only used by spine_posterior experiments");
  }
  if (const auto x = in.number("experiment.z_floor")) cfg.z_floor = *x;

  if (const auto n = in.count("caps.max_particles")) cfg.caps.max_particles = *n;
  cfg.caps.horizon = cfg.grid.back();
  if (const auto x = in.number("caps.horizon")) cfg.caps.horizon = *x;

  read_functional(in, cfg);

  try {
    validate_experiment(cfg);
  } catch (const Error& e) {
    const auto message = std::string{e.what()};
    // "ConfigError: key: message"
    const auto body = message.substr(message.find(": ") + 2);
    const auto key = key_of(body);
    if (in.has(key)) in.fail(key, body.substr(body.find(':') + 2));
    throw;
  }
  return cfg;
}

auto parse_config(const std::string& path) -> Experiment_config {
  auto file = std::ifstream{path, std::ios::binary};
  if (!file) throw Error{Error_kind::config, fmt::format("{}: cannot read config file", path)};
  auto buffer = std::ostringstream{};
  buffer << file.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const Error& e) {
    if (e.kind() != Error_kind::config) throw;
    const auto message = std::string{e.what()};
    throw Error{Error_kind::config, fmt::format("{}: {}", path, message.substr(message.find(": ") + 2))};
  }
}

namespace {

auto num(double x) -> std::string { return fmt::format("{:.17g}", x); }

auto list(const std::vector<double>& xs) -> std::string {
  auto parts = std::vector<std::string>{};
  for (const auto x : xs) parts.push_back(num(x));
  return fmt::format("{}", fmt::join(parts, ","));
}

auto offspring_text(const Offspring_law& law) -> std::string {
  switch (law.kind()) {
    case Offspring_kind::deterministic: return fmt::format("deterministic:{}", law.max_count());
    case Offspring_kind::two_point: return "two_point:" + num(law.parameter());
    case Offspring_kind::geometric: return "geometric:" + num(law.parameter());
    case Offspring_kind::poisson: return "poisson:" + num(law.parameter());
    case Offspring_kind::tabulated: return "table:" + list(law.pmf());
  }
  return {};
}

}  // namespace

auto serialize_config(const Experiment_config& cfg) -> std::string {
  auto out = std::string{};
  auto line = [&](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };

  out += "[experiment]\n";
  line("kind", std::string{to_string(cfg.kind)});
  line("reps", std::to_string(cfg.reps));
  line("seed", std::to_string(cfg.master_seed));
  line("grid", list(cfg.grid));
  if (cfg.kind == Experiment_kind::spine_posterior) {
    line("tally", fmt::format("{}:{}", cfg.tally.kind == Spine_tally::Kind::births_at_most ? "births_le" : "state_eq",
                              num(cfg.tally.threshold)));
  }
  line("z_floor", num(cfg.z_floor));

  out += "\n[caps]\n";
  line("max_particles", std::to_string(cfg.caps.max_particles));
  line("horizon", num(cfg.caps.horizon));

  const auto& spec = cfg.spec;
  out += "\n[model]\n";
  if (std::holds_alternative<No_motion>(spec.motion.kind)) {
    line("motion", "none");
  } else if (const auto* c = std::get_if<Two_state_chain>(&spec.motion.kind)) {
    line("motion", fmt::format("two_state:{},{}", num(c->q01), num(c->q10)));
  } else {
    line("motion", "brownian:" + num(std::get<Brownian_motion>(spec.motion.kind).sigma));
  }
  line("start", num(spec.motion.start));
  line("path_step", num(spec.motion.path_step));
  if (spec.rate.is_constant()) {
    line("rate", "constant:" + num(spec.rate.bound()));
  } else {
    line("rate", "table:" + list(std::get<State_rate_table>(spec.rate.kind()).by_state));
  }
  line("offspring", offspring_text(spec.offspring));
  if (const auto* g = std::get_if<Girsanov_weight>(&spec.zeta)) {
    line("zeta", "girsanov:" + num(g->lambda));
  } else {
    line("zeta", "one");
  }

  out += "\n[functional]\n";
  if (std::holds_alternative<Unit_functional>(cfg.functional)) {
    line("kind", "one");
  } else if (const auto* b = std::get_if<Birth_rate_indicator>(&cfg.functional)) {
    line("kind", "birth_rate");
    line("target", num(b->target));
    line("epsilon", num(b->epsilon));
  } else if (const auto* o = std::get_if<Occupation_average>(&cfg.functional)) {
    line("kind", "occupation");
    line("h", list(o->h));
    switch (o->g) {
      case Occupation_map::identity: line("g", "identity"); break;
      case Occupation_map::square: line("g", "square"); break;
      case Occupation_map::window: line("g", fmt::format("window:{},{}", num(o->window_lo), num(o->window_hi))); break;
    }
  } else {
    const auto& s = std::get<Terminal_speed_indicator>(cfg.functional);
    line("kind", "terminal_speed");
    line("speed", num(s.speed));
    line("epsilon", num(s.epsilon));
  }
  return out;
}

}  // namespace spinelaw
