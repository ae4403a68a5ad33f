#pragma once

#include <stdexcept>
#include <string>

namespace dualvfi {

// Bad arguments, malformed files, violated preconditions. CLI exit code 1.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite values or degenerate numerics. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dualvfi
