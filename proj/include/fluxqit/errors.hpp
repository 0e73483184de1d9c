#pragma once

#include <stdexcept>
#include <string>

namespace fluxqit {

/// Argument outside the mathematical domain of an operation (bad label,
/// dimension mismatch, non-Hermitian generator, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical precondition was violated, typically an integrator step size
/// too coarse for the fastest time scale in the problem.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration (unknown key, violated constraint, bad schema).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fluxqit
