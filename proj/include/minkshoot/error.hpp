#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace minkshoot {

enum class ErrorKind {
    InvalidSpec,
    ParseError,
    ConfigError,
    NonFiniteWeight,
    DegenerateProblem,
    SlopeOutOfRange,
    StepSizeUnderflow,
    OriginHit,
    NoConvergence,
    LiftAmbiguous,
    CountMismatch,
    NotSuperlinear,
    NoBracket,
    SpiralBlowup,
    BoxExceeded,
    TwistNotFound,
    NoFixedPoint,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers what failed.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace minkshoot
