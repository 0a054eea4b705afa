#include "sensorctl/stats.hpp"

#include <cmath>

namespace sensorctl {

MonteCarloEstimate summarize(std::span<const double> samples) {
    MonteCarloEstimate est;
    est.n = samples.size();
    if (samples.empty())
        return est;
    double sum = 0.0;
    for (double x : samples)
        sum += x;
    est.mean = sum / static_cast<double>(est.n);
    if (est.n > 1) {
        double sq = 0.0;
        for (double x : samples)
            sq += (x - est.mean) * (x - est.mean);
        est.standard_error = std::sqrt(sq / static_cast<double>(est.n - 1) / static_cast<double>(est.n));
    }
    return est;
}

} // namespace sensorctl
