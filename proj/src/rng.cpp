#include "sensorctl/rng.hpp"

#include <cmath>
#include <numbers>

namespace sensorctl {

double CounterRng::standard_normal() noexcept {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t CounterRng::categorical(std::span<const double> probabilities) noexcept {
    const double target = uniform();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (probabilities[i] <= 0.0)
            continue;
        last_positive = i;
        cumulative += probabilities[i];
        if (target < cumulative)
            return i;
    }
    return last_positive;
}

} // namespace sensorctl
