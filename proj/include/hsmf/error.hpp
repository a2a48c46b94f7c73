#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsmf {

enum class ErrorCode {
    NonProbabilityVector,
    RatioOutOfRange,
    GapPolicyMismatch,
    BadSchedule,
    MalformedFamily,
    AddressOutOfRange,
    ScaleTooSmall,
    NoBracket,
    InsufficientScales,
    DegenerateGrid,
    ParameterOutOfRange,
    TooDeep,
    ParseError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to a stable, machine-readable token.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace hsmf
