#pragma once

#include <stdexcept>
#include <string>

namespace hodc {

/// Bad caller input: wrong dimensions, unknown names, invalid parameters.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Requested a (p, q, psi) combination for which no certified solve path exists.
class CapabilityError : public std::invalid_argument {
 public:
  explicit CapabilityError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure inside a solver (e.g. an eigendecomposition did not converge).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hodc
