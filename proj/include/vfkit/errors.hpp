#pragma once

#include <stdexcept>
#include <string>

namespace vfkit {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct PoleCollision : Error {
    using Error::Error;
};
struct DenominatorZero : Error {
    using Error::Error;
};
struct NotPairable : Error {
    using Error::Error;
};
struct SingularResolvent : Error {
    using Error::Error;
};
struct InvalidBand : Error {
    using Error::Error;
};
struct InvalidParam : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct EmptySet : Error {
    using Error::Error;
};
struct GridMismatch : Error {
    using Error::Error;
};
struct RankDeficient : Error {
    using Error::Error;
};
struct NonGenericTls : Error {
    using Error::Error;
};
struct DuplicatePoles : Error {
    using Error::Error;
};
struct DegenerateDenominator : Error {
    using Error::Error;
};
struct MissingDerivative : Error {
    using Error::Error;
};
struct TooFewSamples : Error {
    using Error::Error;
};
struct ZeroNorm : Error {
    using Error::Error;
};
struct DivByZero : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

}  // namespace vfkit
