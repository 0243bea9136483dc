#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nicsim {

/// Failure categories raised by the model. The CLI maps these onto exit codes.
enum class ErrorCode {
    CapExceeded,
    IncompatibleEngine,
    NonPositiveRate,
    InvalidConfig,
    InvalidRequest,
    CapacityExceeded,
    UnknownGeneration,
    EmptyPlan,
    InvariantViolation,
    NoReferencePoints,
    Unidentifiable,
    MissingCoverage,
    EmptyReport,
    IoError,
    ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::CapExceeded:        return "CapExceeded";
        case ErrorCode::IncompatibleEngine: return "IncompatibleEngine";
        case ErrorCode::NonPositiveRate:    return "NonPositiveRate";
        case ErrorCode::InvalidConfig:      return "InvalidConfig";
        case ErrorCode::InvalidRequest:     return "InvalidRequest";
        case ErrorCode::CapacityExceeded:   return "CapacityExceeded";
        case ErrorCode::UnknownGeneration:  return "UnknownGeneration";
        case ErrorCode::EmptyPlan:          return "EmptyPlan";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::NoReferencePoints:  return "NoReferencePoints";
        case ErrorCode::Unidentifiable:     return "Unidentifiable";
        case ErrorCode::MissingCoverage:    return "MissingCoverage";
        case ErrorCode::EmptyReport:        return "EmptyReport";
        case ErrorCode::IoError:            return "IoError";
        case ErrorCode::ParseError:         return "ParseError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace nicsim
