#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sensorctl {

// Failure categories shared by every module. The CLI maps these onto exit codes.
enum class ErrorKind {
    DimensionMismatch,
    NonStochasticRow,
    ZeroProbabilityMeasurement,
    SingularInnovation,
    SingularControlWeight,
    InvalidParameters,
    ConstraintViolation,
    IndexOutOfRange,
    SearchSpaceTooLarge,
    NoMinimizer,
    RootFinderFailure,
    ParseError,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace sensorctl
