#pragma once

#include <stdexcept>
#include <string>

namespace ntsopt {

// Numerical failure: quadrature refinement exhausted, root bracket lost,
// optimizer stuck, solver hit its iteration cap. CLI maps this to exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed external input (CSV / JSON / weight files). CLI maps this to exit code 2.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A market model whose parameters violate a structural requirement
// (non-PSD covariance, implied mixing correlations outside [-1, 1], ...).
class InvalidModelError : public std::runtime_error {
 public:
  explicit InvalidModelError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ntsopt
