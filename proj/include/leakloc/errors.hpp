#pragma once

#include <stdexcept>
#include <string>

namespace leakloc {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// signal-core
struct MalformedRow : Error { using Error::Error; };
struct NonUniformSampling : Error { using Error::Error; };
struct EmptyFile : Error { using Error::Error; };
struct RateMismatch : Error { using Error::Error; };
struct NoOverlap : Error { using Error::Error; };

// interference-filter
struct TooShort : Error { using Error::Error; };
struct NyquistViolation : Error { using Error::Error; };

// xcorr-engine
struct LengthMismatch : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };

// localizer / hydraulics
struct InvalidGeometry : Error { using Error::Error; };
struct ZeroActual : Error { using Error::Error; };
struct InvalidEpsilon : Error { using Error::Error; };

// simulator
struct InvalidConfig : Error { using Error::Error; };

// calibration / reporting
struct MissingBaseline : Error { using Error::Error; };
struct UnknownTable : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

} // namespace leakloc
