#pragma once

#include "hnoma/sim.hpp"

#include <string>

namespace hnoma::sim {

// Parses a scenario description.  Structural problems (wrong types, unknown or
// missing keys, keys that the mode forbids) are all collected and reported in
// one SchemaError; semantic range checks live in ScenarioConfig::validate().
ScenarioConfig parse_scenario(const std::string& text);

// Same, reading from a file.  A missing or unreadable file is an InputError.
ScenarioConfig load_scenario(const std::string& path);

} // namespace hnoma::sim
