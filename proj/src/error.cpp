#include "palm/error.hpp"

namespace palm {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ZeroClutterAtMeasurement: return "ZeroClutterAtMeasurement";
        case ErrorCode::EmptyPrior: return "EmptyPrior";
        case ErrorCode::ZeroIntensityPoint: return "ZeroIntensityPoint";
        case ErrorCode::ConditioningOnZeroIntensity: return "ConditioningOnZeroIntensity";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::TruncationInsufficient: return "TruncationInsufficient";
        case ErrorCode::ZeroMassOnSupport: return "ZeroMassOnSupport";
        case ErrorCode::ZeroMeanPmf: return "ZeroMeanPmf";
        case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
        case ErrorCode::ZeroFactorialMoment: return "ZeroFactorialMoment";
        case ErrorCode::MissingAssignment: return "MissingAssignment";
        case ErrorCode::DegenerateMass: return "DegenerateMass";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::MismatchedScanCounts: return "MismatchedScanCounts";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace palm
