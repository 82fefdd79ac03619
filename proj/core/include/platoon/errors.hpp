#pragma once

#include <stdexcept>
#include <string>

namespace platoon {

/// Invalid input: bad sizes, out-of-range indices, malformed configuration.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical kernel failed (non-convergence, loss of definiteness).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace platoon
