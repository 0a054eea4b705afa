#include "sensorctl/error.hpp"

namespace sensorctl {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NonStochasticRow: return "non-stochastic-row";
    case ErrorKind::ZeroProbabilityMeasurement: return "zero-probability-measurement";
    case ErrorKind::SingularInnovation: return "singular-innovation";
    case ErrorKind::SingularControlWeight: return "singular-control-weight";
    case ErrorKind::InvalidParameters: return "invalid-parameters";
    case ErrorKind::ConstraintViolation: return "constraint-violation";
    case ErrorKind::IndexOutOfRange: return "index-out-of-range";
    case ErrorKind::SearchSpaceTooLarge: return "search-space-too-large";
    case ErrorKind::NoMinimizer: return "no-minimizer";
    case ErrorKind::RootFinderFailure: return "root-finder-failure";
    case ErrorKind::ParseError: return "parse-error";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

} // namespace sensorctl
