#pragma once

#include <stdexcept>
#include <string>

namespace wplap {

// Base class for all failures raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed configuration, grid specification, or input file.
struct ConfigError : Error {
  using Error::Error;
};

// A numeric parameter violates a documented admissible range.
struct ParameterError : Error {
  using Error::Error;
};

// A weight evaluated to a non-finite or negative value where a positive
// finite value is required.
struct InvalidWeightError : Error {
  using Error::Error;
};

// A quantity that must be finite (an integral, a cached table entry) grew
// without bound under refinement.
struct DivergenceError : Error {
  using Error::Error;
};

// h_x never reaches the requested value below the search cap.
struct UnreachableValueError : Error {
  using Error::Error;
};

// A sampled triple exposed a zero denominator with a nonzero numerator in
// the quasi-triangle ratio.
struct MetricViolationError : Error {
  using Error::Error;
};

// A solver seed has no usable positive part or the far-point search cap
// was exceeded.
struct DegenerateSeedError : Error {
  using Error::Error;
};

// Line search failed to make progress within the backtracking budget.
struct StallError : Error {
  using Error::Error;
};

// Descent converged but the energy is nonnegative, so no negative local
// minimum exists from this seed.
struct NoNegativeMinimumError : Error {
  using Error::Error;
};

// The deformed path collapsed below the pass level repeatedly.
struct MountainPassError : Error {
  using Error::Error;
};

// An internal invariant (monotone cache, monotone descent log) failed.
struct InvariantError : Error {
  using Error::Error;
};

}  // namespace wplap
