#pragma once

#include <stdexcept>
#include <string>

namespace upm {

// Violated precondition or malformed configuration. CLI maps this to exit 2.
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure (non-convergence, overflow of a reference, divergence).
// CLI maps this to exit 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace upm
