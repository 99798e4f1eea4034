#pragma once

#include <stdexcept>
#include <string>

namespace procurl {

/// Invalid user-facing configuration (pool sizes, environment specs, config files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact computation was requested on an instance exceeding the enumeration budget.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace procurl
