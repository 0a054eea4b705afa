#pragma once

// Machine repair with a diagnosis option: a stationary two-state,
// three-control, two-measurement PO-MDP.
//
// States:       0 = good, 1 = bad
// Controls:     0 = default (operate), 1 = diagnose, 2 = repair
// Measurements: 0 = probably good, 1 = probably bad
//
// rho denotes Pr(state = bad | information).

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "sensorctl/pomdp.hpp"

namespace sensorctl::machine_repair {

inline constexpr std::size_t kDefault = 0;
inline constexpr std::size_t kDiagnose = 1;
inline constexpr std::size_t kRepair = 2;

inline constexpr std::size_t kProbablyGood = 0;
inline constexpr std::size_t kProbablyBad = 1;

struct Params {
    double alpha = 0.2;   ///< single-stage failure probability
    double eta_f = 0.3;   ///< sensor false-alarm probability
    double eta_d = 0.7;   ///< sensor detection probability
    double gamma_f = 0.1; ///< diagnosed false-alarm probability
    double gamma_d = 0.9; ///< diagnosed detection probability
    double c_R = 5.0;     ///< repair cost
    double c_B = 10.0;    ///< cost of a period in the bad state
    double c_D = 1.0;     ///< diagnosis cost
    std::size_t K = 6;
};

/// Throws InvalidParameters when a probability leaves [0,1], c_R <= 0,
/// c_B <= c_R, c_D < 0, gamma_f > eta_f, gamma_d < eta_d or K == 0.
void validate(const Params& params);

[[nodiscard]] pomdp::Model build_model(const Params& params);

/// Closed-form rho_0 for the initial measurement.
[[nodiscard]] double rho_init_closed_form(const Params& params, std::size_t z0);

/// Closed-form rho_k from rho_{k-1}, the preceding control and the new measurement.
[[nodiscard]] double rho_update_closed_form(const Params& params, double rho_prev, std::size_t u, std::size_t z);

[[nodiscard]] inline pomdp::Belief belief_from_rho(std::size_t stage, double rho) {
    Vector p(2);
    p << 1.0 - rho, rho;
    return pomdp::Belief{stage, std::move(p)};
}

struct PolicyCurveTable {
    std::size_t stage = 0;
    std::vector<double> grid;               ///< rho values, strictly increasing in [0,1]
    std::vector<std::array<double, 3>> q;   ///< q_k(rho) per grid point
    std::vector<std::size_t> argmin;        ///< optimal control per grid point
};

inline constexpr std::size_t kDefaultCurvePoints = 401;

/// q_k over a uniform rho grid of `grid_points` points, for every stage.
[[nodiscard]] std::vector<PolicyCurveTable> policy_curves(const Params& params,
                                                          std::size_t grid_points = kDefaultCurvePoints);

enum class SweepTarget { Alpha, SensorAccuracy, DiagnosedAccuracy, DiagnosisCost };

[[nodiscard]] std::string_view to_string(SweepTarget target) noexcept;
/// Accepts alpha, sensor_accuracy, diagnosed_accuracy, c_D.
[[nodiscard]] SweepTarget parse_sweep_target(std::string_view name);

struct SweepRow {
    double value = 0.0;
    double expected_cost = 0.0;
};

/// Parameters with one sweep target replaced:
///   SensorAccuracy sets eta_d = v, eta_f = 1 - v (requires v <= gamma_d);
///   DiagnosedAccuracy sets gamma_d = v, gamma_f = 1 - v (requires v >= eta_d);
///   DiagnosisCost requires 0 <= v <= c_R.
/// Throws ConstraintViolation otherwise.
[[nodiscard]] Params with_target(const Params& params, SweepTarget target, double value);

[[nodiscard]] std::vector<SweepRow> sensitivity_sweep(const Params& params, SweepTarget target,
                                                      const std::vector<double>& values);

/// Default 25-point grids: alpha in [0,1], eta_d in [0.5, gamma_d],
/// gamma_d in [eta_d, 1], c_D in [0, c_R].
[[nodiscard]] std::vector<double> default_sweep_values(const Params& params, SweepTarget target,
                                                       std::size_t points = 25);

/// Expected cost when diagnosis buys no accuracy (gamma = eta). Diagnosing
/// is then never strictly useful, so this is the never-diagnose baseline.
[[nodiscard]] double never_diagnose_cost(const Params& params);

} // namespace sensorctl::machine_repair
