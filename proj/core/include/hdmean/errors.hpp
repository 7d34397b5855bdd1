#pragma once

#include <stdexcept>
#include <string>

namespace hdmean {

/// Numerical failure: non-convergence, singular or indefinite input,
/// degenerate variance estimates. Preconditions on arguments are reported
/// with std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hdmean
