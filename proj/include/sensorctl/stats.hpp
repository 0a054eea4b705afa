#pragma once

#include <cstddef>
#include <span>

namespace sensorctl {

struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0; ///< 0 when n == 1
    std::size_t n = 0;
};

/// Sample mean and standard error, summed in index order.
[[nodiscard]] MonteCarloEstimate summarize(std::span<const double> samples);

} // namespace sensorctl
