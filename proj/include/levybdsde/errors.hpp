#pragma once

#include <stdexcept>
#include <string>

namespace levybdsde {

// Base class for every failure raised by the library. `module()` names the
// component that detected the problem so front ends can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Invalid parameters or a configuration that cannot describe a well-posed
// problem (negative intensities, alpha >= 1, tree too large, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure failed: bisection did not converge, a flow blew up,
// a regression design was rank deficient.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A value left the effective domain of a convex function where the problem
// requires it to stay inside (terminal condition outside Dom(phi)).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace levybdsde
