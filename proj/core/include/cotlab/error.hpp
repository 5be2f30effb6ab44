#pragma once

#include <stdexcept>
#include <string>

namespace cotlab {

// Bad configuration or unusable input files. The CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Violated cross-record contracts, e.g. duplicate (example, seed) keys or
// misaligned condition pairs.
class IntegrityError : public std::runtime_error {
 public:
  explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cotlab
