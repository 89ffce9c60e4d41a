#pragma once

#include <stdexcept>
#include <string>

namespace hcd {

// Base for all numeric/domain failures raised by the library. The CLI maps
// these to exit code 3; malformed input on the CLI side is exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidSpec : Error {
    using Error::Error;
};

struct DegenerateBody : Error {
    using Error::Error;
};

struct NotOnBoundary : Error {
    using Error::Error;
};

// The subdifferential at a corner is an interval of dual angles; the payload
// carries its endpoints so callers can route corners explicitly.
struct CornerAngle : Error {
    double psi_lo;
    double psi_hi;
    CornerAngle(double lo, double hi)
        : Error("corner angle: dual angle lies in an interval"), psi_lo(lo), psi_hi(hi) {}
};

struct OnVerticalAxis : Error {
    using Error::Error;
};

struct ZeroSpeed : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    double bracket_lo;
    double bracket_hi;
    double residual;
    NoConvergence(const std::string& what, double lo, double hi, double res)
        : Error(what), bracket_lo(lo), bracket_hi(hi), residual(res) {}
};

struct CornerEncountered : Error {
    using Error::Error;
};

struct OutOfDomain : Error {
    using Error::Error;
};

struct EmptyBox : Error {
    using Error::Error;
};

struct NonPositiveValue : Error {
    using Error::Error;
};

struct NoFlatPart : Error {
    using Error::Error;
};

struct WitnessInvalid : Error {
    using Error::Error;
};

struct ConstructionFailed : Error {
    using Error::Error;
};

struct NotConcave : Error {
    using Error::Error;
};

}  // namespace hcd
