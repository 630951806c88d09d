#pragma once

#include <stdexcept>
#include <string>

namespace qbl {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct NonFiniteObjective : Error { using Error::Error; };
struct UnsupportedSpec : Error { using Error::Error; };
struct NoFeasibleState : Error { using Error::Error; };
struct DegenerateSpectrum : Error { using Error::Error; };
struct InvalidProbability : Error { using Error::Error; };
struct SingleClassTraining : Error { using Error::Error; };
struct NonPositiveVariance : Error { using Error::Error; };
struct NonPositivePrice : Error { using Error::Error; };
struct ZeroVariance : Error { using Error::Error; };
struct InsufficientHistory : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct MissingColumn : Error { using Error::Error; };
struct DegenerateColumn : Error { using Error::Error; };
struct AllZeroCaps : Error { using Error::Error; };

}  // namespace qbl
