#include "lungphase/errors.hpp"

namespace lungphase {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::EmptyAudio: return "EmptyAudio";
    case ErrorCode::SpecOverflow: return "SpecOverflow";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ClipTooShort: return "ClipTooShort";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::DegeneratePhase: return "DegeneratePhase";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedTextGrid: return "MalformedTextGrid";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::OverlapWithinClass: return "OverlapWithinClass";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

} // namespace lungphase
