#pragma once

#include <stdexcept>
#include <string>

namespace qlink {

// Malformed or inconsistent user configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A simulation produced a result that breaks one of its own invariants.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qlink
