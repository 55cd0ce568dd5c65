#ifndef GOSPHERE_ERRORS_HPP
#define GOSPHERE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gosphere {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise malformed input data.
struct InvalidInputError : Error {
  using Error::Error;
};

/// The Hessian of F^2 is indefinite or numerically singular at some y.
/// The message names the offending vector.
struct NotStronglyConvexError : Error {
  using Error::Error;
};

/// Navigation datum invariant F(-V) < 1 violated, or lambda >= 1.
struct NavigationDomainError : Error {
  using Error::Error;
};

/// A vector field failed the sampled Killing-invariance test.
struct NotKillingError : Error {
  using Error::Error;
};

/// ODE integration failed (step collapse, horizon exceeded, ...).
struct IntegrationError : Error {
  using Error::Error;
};

/// Chart evaluation requested too far outside the safe radius; the caller
/// should switch charts.
struct ChartBoundaryError : Error {
  using Error::Error;
};

/// A geodesic search (distance, closed-orbit return) found nothing.
struct SearchFailureError : Error {
  using Error::Error;
};

/// Presentation is known but deliberately unsupported.
struct OutOfScopeError : Error {
  using Error::Error;
};

/// A documented precondition does not hold.
struct PreconditionError : Error {
  using Error::Error;
};

}  // namespace gosphere

#endif
