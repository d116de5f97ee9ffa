#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpdiff {

enum class ErrorCode {
    InvalidArgument,
    OutOfDomain,
    NonContraction,
    MaxIterExceeded,
    SingularSystem,
    MissingCoefficient,
    BranchNewtonFailure,
    NoSpectralGap,
    NonPositiveEigenfunction,
    NormalizationVanishes,
    NotExpanding,
    ConfigInfeasible,
    RangeViolation,
    DegenerateFit,
    ConfigParseError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for failures of the numerics (as opposed to bad input or IO).
bool is_numerical_failure(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NonContraction: return "NonContraction";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MissingCoefficient: return "MissingCoefficient";
    case ErrorCode::BranchNewtonFailure: return "BranchNewtonFailure";
    case ErrorCode::NoSpectralGap: return "NoSpectralGap";
    case ErrorCode::NonPositiveEigenfunction: return "NonPositiveEigenfunction";
    case ErrorCode::NormalizationVanishes: return "NormalizationVanishes";
    case ErrorCode::NotExpanding: return "NotExpanding";
    case ErrorCode::ConfigInfeasible: return "ConfigInfeasible";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

inline bool is_numerical_failure(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NonContraction:
    case ErrorCode::MaxIterExceeded:
    case ErrorCode::SingularSystem:
    case ErrorCode::BranchNewtonFailure:
    case ErrorCode::NoSpectralGap:
    case ErrorCode::NonPositiveEigenfunction:
    case ErrorCode::NormalizationVanishes:
    case ErrorCode::NotExpanding:
    case ErrorCode::RangeViolation:
    case ErrorCode::DegenerateFit:
        return true;
    default:
        return false;
    }
}

} // namespace fpdiff
