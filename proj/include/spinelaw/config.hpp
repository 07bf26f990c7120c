#pragma once

#include <string>
#include <string_view>

#include "spinelaw/experiments.hpp"

namespace spinelaw {

// Flat `key = value` text. Keys are dotted (model.rate, experiment.reps, ...); a `[section]`
// line prefixes the keys that follow it. `#` starts a comment. Unknown or repeated keys,
// malformed values and invalid models are Config errors naming the key and the line.
// Missing keys take their defaults (see the README for the full list).
auto parse_config_text(std::string_view text) -> Experiment_config;
auto parse_config(const std::string& path) -> Experiment_config;

// Canonical text with every key spelled out; parse_config_text of it reproduces the config.
auto serialize_config(const Experiment_config& cfg) -> std::string;

}  // namespace spinelaw
