#ifndef RDSLAB_ERRORS_HPP
#define RDSLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rdslab {

// Invalid configuration: bad parameter ranges, malformed specs, mismatched
// spaces. Maps to CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A point outside the coordinate chart of a space, or an argument outside
// the mathematical domain of an operation.
class chart_error : public std::runtime_error {
 public:
  explicit chart_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-convergent quadrature, grid/atom collision.
// Maps to CLI exit code 3.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Work estimate exceeds a configured cap; carries advice in the message.
class resource_error : public std::runtime_error {
 public:
  explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// Operation not defined for the given space (e.g. Wasserstein on the disk).
class unsupported_error : public std::runtime_error {
 public:
  explicit unsupported_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rdslab

#endif
