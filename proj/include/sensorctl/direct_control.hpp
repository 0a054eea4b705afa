#pragma once

// Two-stage scalar LQG regulator in which the control u_0 also sets the
// accuracy of the next measurement:
//
//   x_{k+1} = a x_k + b u_k + w_k,   w_k ~ N(0, sigma_w2)
//   z_0 = c x_0 + v_0,               v_0 ~ N(0, sigma_v2)
//   z_1 = c x_1 + d u_0 + v_1,       v_1 ~ N(0, sigma_v2 / (1 + gamma u_0^2))
//   cost = t x_0^2 + r u_0^2 + t x_1^2 + r u_1^2 + t x_2^2
//
// The stage-0 control-dependent cost-to-go is the rational function
//   Q_0(u) = (alpha4 u^4 + ... + alpha0) / (beta2 u^2 + beta0),
// so u_0* is found among the real roots of the quintic numerator of Q_0'.

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "sensorctl/lqg.hpp"

namespace sensorctl::direct_control {

struct ScalarTwoStageModel {
    double m_x = 0.0;
    double sigma_x2 = 1.0;
    double a = 1.0;
    double b = 1.0;
    double sigma_w2 = 1.0;
    double c = 1.0;
    double d = 0.0;
    double sigma_v2 = 1.0;
    double gamma = 10.0;
    double t = 1.0;
    double r = 1.0;
};

/// Throws InvalidParameters unless sigma_x2, sigma_w2, sigma_v2, gamma, r > 0 and t >= 0.
void validate(const ScalarTwoStageModel& model);

struct Stage1Constants {
    double ell1 = 0.0;
    double rho1 = 0.0;
    double kappa1 = 0.0;
};

struct ScalarFilterState {
    double m00 = 0.0; ///< m_{0|0}
    double s00 = 0.0; ///< sigma^2_{0|0}
    double s10 = 0.0; ///< sigma^2_{1|0}
};

/// Which expansion of E[J_1] feeds alpha2 and alpha0.
///
/// Published: the coefficient list exactly as printed with the original
/// derivation, where the c^2 sigma_{1|0}^4 terms carry no kappa1 factor.
/// Exact: those terms multiplied by kappa1, which is what the expectation of
/// kappa1 m_{1|1}^2 actually produces. The two agree whenever kappa1 = 1.
enum class Q0Form { Published, Exact };

struct Q0Coefficients {
    std::array<double, 5> alpha{}; ///< numerator, ascending powers of u0
    double beta0 = 0.0;
    double beta2 = 0.0;
    std::array<double, 6> delta{};   ///< numerator of dQ/du over (beta2 u^2 + beta0)^2
    std::array<double, 9> epsilon{}; ///< numerator of d2Q/du2 over (beta2 u^2 + beta0)^4; epsilon[7] = 0

    [[nodiscard]] double denominator(double u0) const noexcept { return beta2 * u0 * u0 + beta0; }
    [[nodiscard]] double first_derivative(double u0) const noexcept;
    [[nodiscard]] double second_derivative(double u0) const noexcept;
};

/// ell1 = bta/(r+b^2 t), rho1 = (bta)^2/(r+b^2 t), kappa1 = t(a^2 r + b^2 t + r)/(r+b^2 t).
[[nodiscard]] Stage1Constants stage1_constants(const ScalarTwoStageModel& model);

/// Scalar Kalman initialization and prediction for measurement z0.
[[nodiscard]] ScalarFilterState scalar_filter(const ScalarTwoStageModel& model, double z0);

[[nodiscard]] Q0Coefficients q0_coefficients(const ScalarTwoStageModel& model, double m00,
                                             Q0Form form = Q0Form::Published);

/// Derivative coefficients from alpha/beta.
void fill_derivative_coefficients(Q0Coefficients& coeffs);

[[nodiscard]] double q0_eval(const Q0Coefficients& coeffs, double u0) noexcept;

// Root-selection thresholds.
inline constexpr double kImagTol = 1e-8;       ///< |imag| <= kImagTol (1 + |real|) counts as real
inline constexpr double kCurvatureTol = 1e-10; ///< second derivative below -kCurvatureTol rejects a root
inline constexpr double kQTieTol = 1e-9;       ///< relative tolerance for equal Q values

struct U0Solution {
    double u0 = 0.0;
    double q = 0.0;
    std::vector<double> stationary_points; ///< real roots of the first-derivative numerator
    std::vector<double> minima;            ///< stationary points passing the curvature test
};

/// Real stationary points, curvature filter, smallest Q; Q ties go to the
/// point furthest from m00, then to the smallest. Throws NoMinimizer when no
/// candidate survives and RootFinderFailure if the root finder fails.
[[nodiscard]] U0Solution solve_u0(const Q0Coefficients& coeffs, double m00);

[[nodiscard]] double optimal_u0(const ScalarTwoStageModel& model, double m00, Q0Form form = Q0Form::Published);

/// Dense scan of Q_0 over [lo, hi] followed by a golden-section pass in the
/// winning cell. Independent of the root finder; used as a test oracle.
[[nodiscard]] double grid_search_oracle(const ScalarTwoStageModel& model, double m00, double lo, double hi,
                                        double step, Q0Form form = Q0Form::Published);

struct Q0Curve {
    std::size_t case_index = 0;
    double m00 = 0.0;
    double gamma = 0.0;
    std::vector<double> u0;
    std::vector<double> q;
    bool has_minimizer = false;
    double u0_star = 0.0;
    double q_star = 0.0;
};

/// Q_0 tabulated for every (m00 case, gamma) pair over u_grid, in case-major order.
[[nodiscard]] std::vector<Q0Curve> q0_curve(const ScalarTwoStageModel& model, const std::vector<double>& m00_cases,
                                            const std::vector<double>& gamma_values,
                                            const std::vector<double>& u_grid, Q0Form form = Q0Form::Published);

enum class U0SweepTarget { SigmaW2, SigmaV2, Gamma, TOverR };

[[nodiscard]] std::string_view to_string(U0SweepTarget target) noexcept;
/// Accepts sigma_w2, sigma_v2, gamma, t_over_r.
[[nodiscard]] U0SweepTarget parse_u0_sweep_target(std::string_view name);

/// The model with one sweep target replaced; t_over_r scales t and keeps r.
[[nodiscard]] ScalarTwoStageModel with_target(const ScalarTwoStageModel& model, U0SweepTarget target, double value);

struct U0SweepRow {
    double param_value = 0.0;
    double m00 = 0.0;
    double u0_star = 0.0;
    bool ok = true; ///< false when no minimizer exists for this cell
};

/// u0* for each (target value, m00). Each m00 is m_x + offset * sigma_{0|0},
/// with sigma_{0|0} taken from the swept model, so every curve spans the same
/// number of standard deviations.
[[nodiscard]] std::vector<U0SweepRow> sensitivity_sweep_u0(const ScalarTwoStageModel& model, U0SweepTarget target,
                                                           const std::vector<double>& values,
                                                           const std::vector<double>& m00_offsets,
                                                           Q0Form form = Q0Form::Published);

/// `points` offsets evenly spaced in [-1, 1].
[[nodiscard]] std::vector<double> unit_offsets(std::size_t points);

/// Optimal expected total cost E_{z0}[Q_0(m00(z0), u0*(m00(z0)))] by adaptive
/// Gauss-Kronrod quadrature over +-8 standard deviations of z0.
[[nodiscard]] double expected_total_cost(const ScalarTwoStageModel& model, Q0Form form = Q0Form::Published);

/// The equivalent standard LQG model (gamma -> 0 limit: Sigma_v_1 = sigma_v2).
[[nodiscard]] lqg::Model to_lqg_model(const ScalarTwoStageModel& model);

} // namespace sensorctl::direct_control
