#pragma once

#include <stdexcept>
#include <string>

namespace lowthrust {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// State or element set does not describe a bound elliptic orbit.
struct NonElliptic : Error {
    using Error::Error;
};

/// Iterative scheme (Kepler, Lambert, shooting) exceeded its iteration cap.
struct NoConvergence : Error {
    using Error::Error;
};

/// Geometry does not define the required plane/frame (collinear positions, ...).
struct DegenerateGeometry : Error {
    using Error::Error;
};

/// Boundary-value iteration has no admissible root for the requested branch.
struct NoSolution : Error {
    using Error::Error;
};

/// Adaptive integration failed (step underflow, step cap).
struct IntegrationFailure : Error {
    using Error::Error;
};

/// Propagated state left the admissible region (p<=0, f^2+g^2>=1, mass floor).
struct StateInvalid : Error {
    using Error::Error;
};

/// Feature layout / model input dimensions do not match.
struct SchemaMismatch : Error {
    using Error::Error;
};

/// Model file unreadable, truncated, or of wrong version.
struct CorruptModel : Error {
    using Error::Error;
};

/// Configuration file invalid (missing key, out-of-range value).
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace lowthrust
