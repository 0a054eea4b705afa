#include "sensorctl/direct_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sensorctl/error.hpp"
#include "sensorctl/parallel.hpp"
#include "sensorctl/polynomial.hpp"

namespace sensorctl::direct_control {
namespace {

void require(bool ok, const char* what) {
    if (!ok)
        throw Error(ErrorKind::InvalidParameters, what);
}

double filtered_variance(const ScalarTwoStageModel& m) {
    return m.sigma_x2 * m.sigma_v2 / (m.c * m.c * m.sigma_x2 + m.sigma_v2);
}

} // namespace

void validate(const ScalarTwoStageModel& m) {
    const double all[] = {m.m_x, m.sigma_x2, m.a, m.b, m.sigma_w2, m.c, m.d, m.sigma_v2, m.gamma, m.t, m.r};
    for (double v : all)
        require(std::isfinite(v), "direct-control parameters must be finite");
    require(m.sigma_x2 > 0.0, "sigma_x2 must be positive");
    require(m.sigma_w2 > 0.0, "sigma_w2 must be positive");
    require(m.sigma_v2 > 0.0, "sigma_v2 must be positive");
    require(m.gamma > 0.0, "gamma must be positive");
    require(m.t >= 0.0, "t must be nonnegative");
    require(m.r > 0.0, "r must be positive");
}

double Q0Coefficients::first_derivative(double u0) const noexcept {
    const double den = denominator(u0);
    return horner(delta, u0) / (den * den);
}

double Q0Coefficients::second_derivative(double u0) const noexcept {
    const double den2 = denominator(u0) * denominator(u0);
    return horner(epsilon, u0) / (den2 * den2);
}

Stage1Constants stage1_constants(const ScalarTwoStageModel& m) {
    const double w = m.r + m.b * m.b * m.t;
    const double bta = m.b * m.t * m.a;
    return {bta / w, bta * bta / w, m.t * (m.a * m.a * m.r + m.b * m.b * m.t + m.r) / w};
}

ScalarFilterState scalar_filter(const ScalarTwoStageModel& m, double z0) {
    ScalarFilterState out;
    out.s00 = filtered_variance(m);
    out.m00 = m.m_x + m.c * out.s00 / m.sigma_v2 * (z0 - m.c * m.m_x);
    out.s10 = m.a * m.a * out.s00 + m.sigma_w2;
    return out;
}

Q0Coefficients q0_coefficients(const ScalarTwoStageModel& m, double m00, Q0Form form) {
    const Stage1Constants k1 = stage1_constants(m);
    const double s00 = filtered_variance(m);
    const double s10 = m.a * m.a * s00 + m.sigma_w2;
    const double c2 = m.c * m.c;
    const double gain_term = form == Q0Form::Exact ? k1.kappa1 : 1.0;
    const double info = gain_term * c2 * s10 * s10;

    Q0Coefficients q;
    q.beta2 = c2 * s10 * m.gamma;
    q.beta0 = c2 * s10 + m.sigma_v2;
    const double quad = m.r + m.b * m.b * k1.kappa1;
    const double lin = 2.0 * m.a * m.b * k1.kappa1 * m00;
    const double base = m.t * (m00 * m00 + s00 + m.sigma_w2) + k1.kappa1 * m.a * m.a * m00 * m00;
    q.alpha[4] = quad * q.beta2;
    q.alpha[3] = lin * q.beta2;
    q.alpha[2] = quad * q.beta0 + base * q.beta2 + info * m.gamma;
    q.alpha[1] = lin * q.beta0;
    q.alpha[0] = base * q.beta0 + (k1.kappa1 + k1.rho1) * s10 * m.sigma_v2 + info;
    fill_derivative_coefficients(q);
    return q;
}

void fill_derivative_coefficients(Q0Coefficients& q) {
    const auto& a = q.alpha;
    const double b0 = q.beta0;
    const double b2 = q.beta2;
    auto& d = q.delta;
    d[5] = 2.0 * a[4] * b2;
    d[4] = a[3] * b2;
    d[3] = 4.0 * a[4] * b0;
    d[2] = 3.0 * a[3] * b0 - a[1] * b2;
    d[1] = 2.0 * (a[2] * b0 - a[0] * b2);
    d[0] = a[1] * b0;

    auto& e = q.epsilon;
    e[8] = d[5] * b2 * b2;
    e[7] = 0.0;
    e[6] = 6.0 * d[5] * b2 * b0 - d[3] * b2 * b2;
    e[5] = 4.0 * d[4] * b2 * b0 - 2.0 * d[2] * b2 * b2;
    e[4] = 5.0 * d[5] * b0 * b0 + 2.0 * d[3] * b2 * b0 - 3.0 * d[1] * b2 * b2;
    e[3] = 4.0 * (d[4] * b0 * b0 - d[0] * b2 * b2);
    e[2] = 3.0 * d[3] * b0 * b0 - 2.0 * d[1] * b2 * b0;
    e[1] = 2.0 * d[2] * b0 * b0 - 4.0 * d[0] * b2 * b0;
    e[0] = d[1] * b0 * b0;
}

double q0_eval(const Q0Coefficients& q, double u0) noexcept {
    return horner(q.alpha, u0) / q.denominator(u0);
}

U0Solution solve_u0(const Q0Coefficients& q, double m00) {
    U0Solution out;
    for (const auto& root : polynomial_roots(q.delta)) {
        if (std::abs(root.imag()) <= kImagTol * (1.0 + std::abs(root.real())))
            out.stationary_points.push_back(root.real());
    }
    std::sort(out.stationary_points.begin(), out.stationary_points.end());
    for (double u : out.stationary_points) {
        if (q.second_derivative(u) >= -kCurvatureTol)
            out.minima.push_back(u);
    }
    if (out.minima.empty())
        throw Error(ErrorKind::NoMinimizer, "no stationary point of Q0 passes the curvature test");

    double best_q = std::numeric_limits<double>::infinity();
    for (double u : out.minima)
        best_q = std::min(best_q, q0_eval(q, u));
    const double q_slack = kQTieTol * std::max(1.0, std::abs(best_q));

    // minima is sorted, so a distance tie keeps the smaller root.
    bool found = false;
    double best_dist = 0.0;
    for (double u : out.minima) {
        const double value = q0_eval(q, u);
        if (value > best_q + q_slack)
            continue;
        const double dist = std::abs(u - m00);
        if (!found || dist > best_dist + kQTieTol * (1.0 + best_dist)) {
            found = true;
            best_dist = dist;
            out.u0 = u;
            out.q = value;
        }
    }
    return out;
}

double optimal_u0(const ScalarTwoStageModel& model, double m00, Q0Form form) {
    validate(model);
    return solve_u0(q0_coefficients(model, m00, form), m00).u0;
}

double grid_search_oracle(const ScalarTwoStageModel& model, double m00, double lo, double hi, double step,
                          Q0Form form) {
    validate(model);
    if (!(lo < hi) || !(step > 0.0))
        throw Error(ErrorKind::InvalidParameters, "grid search needs lo < hi and step > 0");
    const Q0Coefficients q = q0_coefficients(model, m00, form);
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    double best_u = lo;
    double best_q = q0_eval(q, lo);
    for (std::size_t i = 1; i < count; ++i) {
        const double u = lo + static_cast<double>(i) * step;
        const double value = q0_eval(q, u);
        if (value < best_q) {
            best_q = value;
            best_u = u;
        }
    }

    // Golden-section pass over the neighbouring cells.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::max(lo, best_u - step);
    double b = std::min(hi, best_u + step);
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = q0_eval(q, x1);
    double f2 = q0_eval(q, x2);
    for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = q0_eval(q, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = q0_eval(q, x2);
        }
    }
    const double refined = 0.5 * (a + b);
    return q0_eval(q, refined) <= best_q ? refined : best_u;
}

std::vector<Q0Curve> q0_curve(const ScalarTwoStageModel& model, const std::vector<double>& m00_cases,
                              const std::vector<double>& gamma_values, const std::vector<double>& u_grid,
                              Q0Form form) {
    std::vector<Q0Curve> curves;
    for (std::size_t i = 0; i < m00_cases.size(); ++i) {
        for (double gamma : gamma_values) {
            ScalarTwoStageModel m = model;
            m.gamma = gamma;
            validate(m);
            Q0Curve curve;
            curve.case_index = i;
            curve.m00 = m00_cases[i];
            curve.gamma = gamma;
            const Q0Coefficients q = q0_coefficients(m, curve.m00, form);
            curve.u0 = u_grid;
            for (double u : u_grid)
                curve.q.push_back(q0_eval(q, u));
            try {
                const U0Solution sol = solve_u0(q, curve.m00);
                curve.has_minimizer = true;
                curve.u0_star = sol.u0;
                curve.q_star = sol.q;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoMinimizer)
                    throw;
            }
            curves.push_back(std::move(curve));
        }
    }
    return curves;
}

std::string_view to_string(U0SweepTarget target) noexcept {
    switch (target) {
    case U0SweepTarget::SigmaW2: return "sigma_w2";
    case U0SweepTarget::SigmaV2: return "sigma_v2";
    case U0SweepTarget::Gamma: return "gamma";
    case U0SweepTarget::TOverR: return "t_over_r";
    }
    return "unknown";
}

U0SweepTarget parse_u0_sweep_target(std::string_view name) {
    for (auto t : {U0SweepTarget::SigmaW2, U0SweepTarget::SigmaV2, U0SweepTarget::Gamma, U0SweepTarget::TOverR}) {
        if (to_string(t) == name)
            return t;
    }
    throw Error(ErrorKind::InvalidParameters, "unknown sweep target '" + std::string(name) + "'");
}

ScalarTwoStageModel with_target(const ScalarTwoStageModel& model, U0SweepTarget target, double value) {
    ScalarTwoStageModel m = model;
    switch (target) {
    case U0SweepTarget::SigmaW2: m.sigma_w2 = value; break;
    case U0SweepTarget::SigmaV2: m.sigma_v2 = value; break;
    case U0SweepTarget::Gamma: m.gamma = value; break;
    case U0SweepTarget::TOverR: m.t = value * m.r; break;
    }
    validate(m);
    return m;
}

std::vector<U0SweepRow> sensitivity_sweep_u0(const ScalarTwoStageModel& model, U0SweepTarget target,
                                             const std::vector<double>& values,
                                             const std::vector<double>& m00_offsets, Q0Form form) {
    std::vector<ScalarTwoStageModel> models;
    for (double v : values)
        models.push_back(with_target(model, target, v));
    const std::size_t cols = m00_offsets.size();
    std::vector<U0SweepRow> rows(values.size() * cols);
    parallel_for(rows.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const ScalarTwoStageModel& m = models[idx / cols];
            U0SweepRow& row = rows[idx];
            row.param_value = values[idx / cols];
            row.m00 = m.m_x + m00_offsets[idx % cols] * std::sqrt(filtered_variance(m));
            try {
                row.u0_star = solve_u0(q0_coefficients(m, row.m00, form), row.m00).u0;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoMinimizer)
                    throw;
                row.ok = false;
                row.u0_star = std::numeric_limits<double>::quiet_NaN();
            }
        }
    });
    return rows;
}

std::vector<double> unit_offsets(std::size_t points) {
    if (points < 2)
        throw Error(ErrorKind::InvalidParameters, "need at least two m00 points");
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    return out;
}

double expected_total_cost(const ScalarTwoStageModel& model, Q0Form form) {
    validate(model);
    const double s00 = filtered_variance(model);
    // m00 is affine in z0, hence Gaussian with mean m_x.
    const double sd_m = std::abs(model.c) * s00 / model.sigma_v2 *
                        std::sqrt(model.c * model.c * model.sigma_x2 + model.sigma_v2);
    auto j0 = [&](double m00) { return solve_u0(q0_coefficients(model, m00, form), m00).q; };
    if (sd_m == 0.0)
        return j0(model.m_x);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
    auto integrand = [&](double xi) { return j0(model.m_x + sd_m * xi) * inv_sqrt_2pi * std::exp(-0.5 * xi * xi); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, -8.0, 8.0, 15, 1e-10);
}

lqg::Model to_lqg_model(const ScalarTwoStageModel& model) {
    validate(model);
    auto s = [](double v) { return Matrix::Constant(1, 1, v); };
    lqg::Model out;
    out.K = 2;
    out.n = out.m = out.s = 1;
    out.A = {s(model.a), s(model.a)};
    out.B = {s(model.b), s(model.b)};
    out.C = {s(model.c), s(model.c)};
    out.D = {s(model.d)};
    out.T = {s(model.t), s(model.t), s(model.t)};
    out.R = {s(model.r), s(model.r)};
    out.Sigma_w = {s(model.sigma_w2), s(model.sigma_w2)};
    out.Sigma_v = {s(model.sigma_v2), s(model.sigma_v2)};
    out.m_x0 = Vector::Constant(1, model.m_x);
    out.Sigma_x0 = s(model.sigma_x2);
    return out;
}

} // namespace sensorctl::direct_control
