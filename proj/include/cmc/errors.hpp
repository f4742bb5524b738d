#pragma once

#include <stdexcept>
#include <string>

namespace cmc {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not match.
struct DimMismatchError : Error {
  using Error::Error;
};

/// A documented precondition was violated (bad step size, empty input, ...).
struct PreconditionError : Error {
  using Error::Error;
};

/// The spectrum has imaginary parts beyond tolerance; only real spectra are
/// supported.
struct ComplexSpectrumError : Error {
  using Error::Error;
};

/// The eigenvector matrix is numerically rank-deficient.
struct DefectiveError : Error {
  using Error::Error;
};

/// A matrix required to be invertible is singular to working precision.
struct SingularError : Error {
  using Error::Error;
};

/// A trajectory left the configured norm bound.
struct DivergedError : Error {
  using Error::Error;
};

/// T_y * jac_u is singular, so no auxiliary input transform exists.
struct SingularInputMapError : Error {
  using Error::Error;
};

/// Gain discriminant K_d^2 - 4 K_p lambda_d is negative.
struct NegativeDiscriminantError : Error {
  using Error::Error;
};

/// Some but not all K_p entries are zero; the two constructions cannot mix.
struct MixedKpError : Error {
  using Error::Error;
};

/// Open-loop spectrum is not strictly negative; sign constraints alone do not
/// apply.
struct UnstableOpenLoopError : Error {
  using Error::Error;
};

/// Bad experiment configuration (parse error, unknown key, invariant breach).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace cmc
