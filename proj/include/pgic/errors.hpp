// Error taxonomy shared by the library and the CLI exit-code mapping.
#pragma once

#include <stdexcept>
#include <string>

namespace pgic {

// Invalid configuration, scenario, or run description (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Equilibrium solver failed to reach its tolerance (CLI exit code 3).
struct OracleError : std::runtime_error {
  explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failures while reading or writing run artifacts (CLI exit code 4).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pgic
