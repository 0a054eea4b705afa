#pragma once

#include <cstddef>
#include <functional>

namespace sensorctl {

/// Worker count: hardware concurrency, capped by SENSORCTL_THREADS when set.
[[nodiscard]] std::size_t worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Callers write results
/// into slot i, so output order never depends on scheduling. The first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t begin, std::size_t end)>& body);

} // namespace sensorctl
