#include "sensorctl/machine_repair.hpp"

#include <string>

#include "sensorctl/parallel.hpp"

namespace sensorctl::machine_repair {
namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Slack for the accuracy orderings, so that eta_d = v, eta_f = 1 - v sweeps
// survive the rounding of 1 - v.
constexpr double kOrderTol = 1e-12;

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Matrix observation(double false_alarm, double detection) {
    return mat2(1.0 - false_alarm, false_alarm, 1.0 - detection, detection);
}

// Bayes correction of a prior bad-state probability by one sensor reading.
double correct(double prior_bad, double false_alarm, double detection, std::size_t z) {
    const double like_good = z == kProbablyBad ? false_alarm : 1.0 - false_alarm;
    const double like_bad = z == kProbablyBad ? detection : 1.0 - detection;
    const double den = like_good * (1.0 - prior_bad) + like_bad * prior_bad;
    if (!(den > 0.0))
        throw Error(ErrorKind::ZeroProbabilityMeasurement, "measurement has zero probability");
    return like_bad * prior_bad / den;
}

} // namespace

void validate(const Params& p) {
    for (double prob : {p.alpha, p.eta_f, p.eta_d, p.gamma_f, p.gamma_d}) {
        if (!is_probability(prob))
            throw Error(ErrorKind::InvalidParameters, "probabilities must lie in [0,1]");
    }
    if (!(p.c_R > 0.0))
        throw Error(ErrorKind::InvalidParameters, "c_R must be positive");
    if (!(p.c_B > p.c_R))
        throw Error(ErrorKind::InvalidParameters, "c_B must exceed c_R");
    if (!(p.c_D >= 0.0))
        throw Error(ErrorKind::InvalidParameters, "c_D must be nonnegative");
    if (p.gamma_f > p.eta_f + kOrderTol)
        throw Error(ErrorKind::InvalidParameters, "gamma_f must not exceed eta_f");
    if (p.gamma_d < p.eta_d - kOrderTol)
        throw Error(ErrorKind::InvalidParameters, "gamma_d must be at least eta_d");
    if (p.K == 0)
        throw Error(ErrorKind::InvalidParameters, "K must be at least 1");
}

pomdp::Model build_model(const Params& p) {
    validate(p);
    const Matrix operate = mat2(1.0 - p.alpha, p.alpha, 0.0, 1.0);
    const Matrix renew = mat2(1.0 - p.alpha, p.alpha, 1.0 - p.alpha, p.alpha);
    const Matrix sensor = observation(p.eta_f, p.eta_d);
    const Matrix diagnosed = observation(p.gamma_f, p.gamma_d);

    pomdp::Stage stage;
    stage.n = 2;
    stage.m = 3;
    stage.s = 2;
    stage.F = {operate, operate, renew};
    stage.G = {mat2(0.0, 0.0, p.c_B, p.c_B), mat2(p.c_D, p.c_D, p.c_D + p.c_B, p.c_D + p.c_B),
               mat2(p.c_R, p.c_R, p.c_R, p.c_R)};

    pomdp::Model model;
    model.stages.assign(p.K, stage);
    for (std::size_t k = 1; k < p.K; ++k)
        model.stages[k].H = {sensor, diagnosed, sensor};
    model.H0 = sensor;
    model.p0 = Vector(2);
    model.p0 << 1.0 - p.alpha, p.alpha;
    return model;
}

double rho_init_closed_form(const Params& p, std::size_t z0) {
    if (z0 > kProbablyBad)
        throw Error(ErrorKind::IndexOutOfRange, "measurement " + std::to_string(z0));
    return correct(p.alpha, p.eta_f, p.eta_d, z0);
}

double rho_update_closed_form(const Params& p, double rho_prev, std::size_t u, std::size_t z) {
    if (u > kRepair || z > kProbablyBad)
        throw Error(ErrorKind::IndexOutOfRange, "control or measurement index");
    switch (u) {
    case kDefault:
        return correct(p.alpha + (1.0 - p.alpha) * rho_prev, p.eta_f, p.eta_d, z);
    case kDiagnose:
        return correct(p.alpha + (1.0 - p.alpha) * rho_prev, p.gamma_f, p.gamma_d, z);
    default:
        // Repair resets the machine; the prior no longer depends on rho_prev.
        return correct(p.alpha, p.eta_f, p.eta_d, z);
    }
}

std::vector<PolicyCurveTable> policy_curves(const Params& params, std::size_t grid_points) {
    if (grid_points < 2)
        throw Error(ErrorKind::InvalidParameters, "policy curves need at least 2 grid points");
    const pomdp::Model model = build_model(params);
    std::vector<PolicyCurveTable> tables(params.K);
    for (std::size_t k = 0; k < params.K; ++k) {
        PolicyCurveTable& t = tables[k];
        t.stage = k;
        t.grid.resize(grid_points);
        t.q.resize(grid_points);
        t.argmin.resize(grid_points);
        for (std::size_t i = 0; i < grid_points; ++i)
            t.grid[i] = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    }
    parallel_for(params.K * grid_points, [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            PolicyCurveTable& t = tables[idx / grid_points];
            const std::size_t i = idx % grid_points;
            const Vector q = pomdp::q_vector(model, belief_from_rho(t.stage, t.grid[i]));
            t.q[i] = {q[0], q[1], q[2]};
            t.argmin[i] = pomdp::argmin_first(q);
        }
    });
    return tables;
}

std::string_view to_string(SweepTarget target) noexcept {
    switch (target) {
    case SweepTarget::Alpha: return "alpha";
    case SweepTarget::SensorAccuracy: return "sensor_accuracy";
    case SweepTarget::DiagnosedAccuracy: return "diagnosed_accuracy";
    case SweepTarget::DiagnosisCost: return "c_D";
    }
    return "unknown";
}

SweepTarget parse_sweep_target(std::string_view name) {
    for (auto t : {SweepTarget::Alpha, SweepTarget::SensorAccuracy, SweepTarget::DiagnosedAccuracy,
                   SweepTarget::DiagnosisCost}) {
        if (name == to_string(t))
            return t;
    }
    throw Error(ErrorKind::InvalidParameters, "unknown sweep target '" + std::string(name) + "'");
}

Params with_target(const Params& params, SweepTarget target, double value) {
    Params p = params;
    switch (target) {
    case SweepTarget::Alpha:
        if (!is_probability(value))
            throw Error(ErrorKind::ConstraintViolation, "alpha must lie in [0,1]");
        p.alpha = value;
        break;
    case SweepTarget::SensorAccuracy:
        if (!is_probability(value) || value > p.gamma_d + kOrderTol)
            throw Error(ErrorKind::ConstraintViolation, "sensor accuracy must lie in [0, gamma_d]");
        p.eta_d = value;
        p.eta_f = 1.0 - value;
        break;
    case SweepTarget::DiagnosedAccuracy:
        if (!is_probability(value) || value < p.eta_d - kOrderTol)
            throw Error(ErrorKind::ConstraintViolation, "diagnosed accuracy must lie in [eta_d, 1]");
        p.gamma_d = value;
        p.gamma_f = 1.0 - value;
        break;
    case SweepTarget::DiagnosisCost:
        if (!(value >= 0.0) || value > p.c_R)
            throw Error(ErrorKind::ConstraintViolation, "c_D must lie in [0, c_R]");
        p.c_D = value;
        break;
    }
    try {
        validate(p);
    } catch (const Error& e) {
        throw Error(ErrorKind::ConstraintViolation, e.what());
    }
    return p;
}

std::vector<SweepRow> sensitivity_sweep(const Params& params, SweepTarget target, const std::vector<double>& values) {
    std::vector<Params> variants;
    variants.reserve(values.size());
    for (double v : values)
        variants.push_back(with_target(params, target, v));

    std::vector<SweepRow> rows(values.size());
    parallel_for(values.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            pomdp::BeliefCache cache;
            rows[i] = {values[i], pomdp::expected_total_cost(build_model(variants[i]), &cache)};
        }
    });
    return rows;
}

std::vector<double> default_sweep_values(const Params& params, SweepTarget target, std::size_t points) {
    if (points < 2)
        throw Error(ErrorKind::InvalidParameters, "sweeps need at least 2 points");
    double lo = 0.0;
    double hi = 1.0;
    switch (target) {
    case SweepTarget::Alpha: break;
    case SweepTarget::SensorAccuracy: lo = 0.5; hi = params.gamma_d; break;
    case SweepTarget::DiagnosedAccuracy: lo = params.eta_d; hi = 1.0; break;
    case SweepTarget::DiagnosisCost: lo = 0.0; hi = params.c_R; break;
    }
    std::vector<double> values(points);
    for (std::size_t i = 0; i < points; ++i)
        values[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return values;
}

double never_diagnose_cost(const Params& params) {
    Params p = params;
    p.gamma_f = p.eta_f;
    p.gamma_d = p.eta_d;
    pomdp::BeliefCache cache;
    return pomdp::expected_total_cost(build_model(p), &cache);
}

} // namespace sensorctl::machine_repair
