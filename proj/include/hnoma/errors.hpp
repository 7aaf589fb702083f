#pragma once

#include <stdexcept>
#include <string>

namespace hnoma {

// Invalid configuration supplied by the caller (bad dimensions, negative
// variances, unsupported parameter combinations).
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed runtime input (NaN/Inf samples, mismatched buffer lengths).
struct InputError : std::invalid_argument {
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Scenario document violates the schema (missing/unknown keys, wrong types).
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// A should-never-happen condition; indicates a bug, not a user mistake.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

} // namespace hnoma
