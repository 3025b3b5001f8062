#pragma once

#include <stdexcept>
#include <string>

namespace ionlattice {

// Operator or state dimensions do not agree, or a truncation is too small.
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A scalar argument lies outside the mathematical domain of the operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// A parameter set that cannot be simulated as requested (nonphysical values,
// insufficient Fock truncation for the expansion order, ...).
class ConfigurationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Zero (or guard-band) denominator omega_z +/- omega_r in the effective model.
class ResonanceError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Numerical integration broke its norm, trace or positivity budget.
class IntegratorError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace ionlattice
