#pragma once

#include <stdexcept>
#include <string>

namespace classrep {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Result would overflow / leave the representable range.
struct RangeError : Error {
    using Error::Error;
};

// An iterative scheme (basis refinement, bisection, ...) failed to settle.
struct ConvergenceError : Error {
    using Error::Error;
};

// A quadrature or series evaluation could not reach its tolerance.
struct NumericError : Error {
    using Error::Error;
};

// Bad user-facing configuration (CLI flags, config file).
struct ConfigError : Error {
    using Error::Error;
};

// A distribution turned out to have a non-integrable singularity.  Carries
// the fitted power so callers can report how divergent the input was.
struct IntegrabilityError : Error {
    double fitted_exponent;
    explicit IntegrabilityError(const std::string& what, double exponent)
        : Error(what), fitted_exponent(exponent) {}
};

} // namespace classrep
