#pragma once

#include <stdexcept>
#include <string>

namespace cvsim {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error { using Error::Error; };
struct SingularSystem    : Error { using Error::Error; };
struct NoConvergence     : Error { using Error::Error; };
struct NotHermitian      : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct UnstableDrift     : Error { using Error::Error; };
struct ToleranceNotMet   : Error { using Error::Error; };
struct NoBracket         : Error { using Error::Error; };
struct NoRoot            : Error { using Error::Error; };
struct InvalidChannel    : Error { using Error::Error; };
struct SingularResolvent : Error { using Error::Error; };
struct SingularCM        : Error { using Error::Error; };
struct NegativeDiscriminant : Error { using Error::Error; };
struct NotSymmetric      : Error { using Error::Error; };
struct Unphysical        : Error { using Error::Error; };
struct DomainError       : Error { using Error::Error; };
struct FixedPointDiverged : Error { using Error::Error; };
struct NonPositiveInput  : Error { using Error::Error; };
struct NotOrthogonal     : Error { using Error::Error; };
struct ConfigParse       : Error { using Error::Error; };
struct IoError           : Error { using Error::Error; };

} // namespace cvsim
