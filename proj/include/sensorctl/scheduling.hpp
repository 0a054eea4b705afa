#pragma once

// Measurement scheduling for the LQG regulator: at every stage a sensor is
// picked from a finite menu; sensor y at stage k sets the noise covariance of
// measurement z_{k+1} and costs c_k(y). The error covariances do not depend
// on measurement realizations, so the optimal schedule is the solution of a
// deterministic dynamic program over the reachable covariances.

#include <cstddef>
#include <vector>

#include "sensorctl/lqg.hpp"

namespace sensorctl::scheduling {

struct SensorOption {
    Matrix cov; ///< Sigma_v_{k+1}(y), s x s symmetric PD
    double cost = 0.0;
};

/// The base model supplies dynamics, C_k, Sigma_w, the cost weights and the
/// initial measurement noise Sigma_v_0; its Sigma_v_k for k >= 1 are unused.
struct SensorMenu {
    lqg::Model base;
    std::vector<std::vector<SensorOption>> options; ///< K lists; list k holds the stage-k choices
};

struct ScheduleResult {
    std::vector<std::size_t> schedule;     ///< y_0 .. y_{K-1}, zero-based
    double total_measurement_cost = 0.0;   ///< H_0(Sigma_{0|0})
    std::vector<Matrix> covariances;       ///< Sigma^y_{k|k}, k = 0..K-1
    std::vector<double> estimation_costs;  ///< trace(P_k Sigma^y_{k|k})
    std::vector<double> measurement_costs; ///< c_k(y_k)
};

struct ScheduleOptions {
    bool merge_covariances = true;
    double merge_tol = 1e-12; ///< entrywise tolerance for treating two covariances as one node
};

inline constexpr double kMaxExhaustiveSchedules = 1e6;

/// Throws DimensionMismatch / InvalidParameters.
void validate_menu(const SensorMenu& menu);

/// Sigma_{0|0} from the base model's C_0, Sigma_v_0 and Sigma_x0.
[[nodiscard]] Matrix initial_covariance(const SensorMenu& menu);

/// Sigma^y_{k+1|k+1} from Sigma^y_{k|k} and sensor y chosen at stage k (k <= K-2).
[[nodiscard]] Matrix covariance_step(const SensorMenu& menu, std::size_t k, const Matrix& sigma, std::size_t y);

/// Full cost decomposition of a fixed schedule. Throws IndexOutOfRange.
[[nodiscard]] ScheduleResult evaluate_schedule(const SensorMenu& menu, const lqg::GainSchedule& gains,
                                               const std::vector<std::size_t>& schedule);

/// sum_k trace(P_k Sigma^y_{k|k}) + c_k(y_k).
[[nodiscard]] double schedule_cost(const SensorMenu& menu, const lqg::GainSchedule& gains,
                                   const std::vector<std::size_t>& schedule);

/// Backward DP over the reachable covariance tree. Ties go to the smaller
/// sensor index; the last stage is decided by c_{K-1} alone.
[[nodiscard]] ScheduleResult optimal_schedule(const SensorMenu& menu, const lqg::GainSchedule& gains,
                                              const ScheduleOptions& options = {});

/// Brute force over all schedules in lexicographic order; a later schedule
/// replaces the incumbent only when strictly cheaper beyond a 1e-12 relative
/// tolerance. Throws SearchSpaceTooLarge above kMaxExhaustiveSchedules.
[[nodiscard]] ScheduleResult exhaustive_schedule_oracle(const SensorMenu& menu, const lqg::GainSchedule& gains);

} // namespace sensorctl::scheduling
