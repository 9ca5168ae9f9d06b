#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace msde {

/// Invalid or inconsistent user input (bad parameter, malformed config).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A simulated state left the representable range (NaN/Inf component).
class ExplosionError : public std::runtime_error {
 public:
  ExplosionError(const std::string& what, int step_index, std::uint64_t seed)
      : std::runtime_error(what), step_index(step_index), seed(seed) {}
  int step_index;
  std::uint64_t seed;
};

/// The level-doubling loop ran out of truncation levels before the path
/// stopped leaving the identity ball.
class SettleError : public std::runtime_error {
 public:
  SettleError(const std::string& what, int n_max, std::uint64_t seed)
      : std::runtime_error(what), n_max(n_max), seed(seed) {}
  int n_max;
  std::uint64_t seed;
};

}  // namespace msde
