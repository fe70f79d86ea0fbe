#pragma once

#include <stdexcept>
#include <string>

namespace palm {

enum class ErrorCode {
    ZeroClutterAtMeasurement,
    EmptyPrior,
    ZeroIntensityPoint,
    ConditioningOnZeroIntensity,
    DegenerateDenominator,
    TruncationInsufficient,
    ZeroMassOnSupport,
    ZeroMeanPmf,
    EnumerationTooLarge,
    ZeroFactorialMoment,
    MissingAssignment,
    DegenerateMass,
    EmptyCloud,
    MismatchedScanCounts,
    InvalidConfig,
    IoError,
    InvalidArgument,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace palm
