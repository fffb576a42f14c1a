#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lungphase {

enum class ErrorCode {
    UnsupportedEncoding,
    CorruptHeader,
    EmptyAudio,
    SpecOverflow,
    IoFailure,
    ClipTooShort,
    OutOfRange,
    ParseError,
    InvalidBox,
    DegeneratePhase,
    DomainMismatch,
    MissingFile,
    MalformedTextGrid,
    UnknownLabel,
    OverlapWithinClass,
    InvariantViolation,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

// Recoverable, user-facing failure. Internal bugs use std::logic_error.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace lungphase
