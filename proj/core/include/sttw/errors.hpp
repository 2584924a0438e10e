#pragma once

#include <stdexcept>
#include <string>

namespace sttw {

/// Model evaluated outside its validity domain (|delta| or |phi| near pi/2).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative solver failed to converge or produced non-finite iterates.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad file, inconsistent rates, indefinite weights...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No roll equilibrium exists under the estimated disturbance.
class InfeasibleEquilibrium : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure that recovery could not fix (e.g. covariance lost PD).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sttw
