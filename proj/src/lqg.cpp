#include "sensorctl/lqg.hpp"

#include <string>

#include "sensorctl/parallel.hpp"

namespace sensorctl::lqg {
namespace {

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what) {
    if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
        throw Error(ErrorKind::DimensionMismatch,
                    what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                        std::to_string(rows) + "x" + std::to_string(cols));
    }
}

void check_count(const std::vector<Matrix>& v, std::size_t count, const char* what) {
    if (v.size() != count)
        throw Error(ErrorKind::DimensionMismatch, std::string(what) + " needs " + std::to_string(count) +
                                                      " entries, got " + std::to_string(v.size()));
}

std::string at(const char* what, std::size_t k) { return std::string(what) + "[" + std::to_string(k) + "]"; }

// Gain Sigma C' (C Sigma C' + Sigma_v)^{-1}, computed as the transpose of a
// positive-definite solve.
Matrix kalman_gain(const Matrix& C, const Matrix& sigma, const Matrix& sigma_v) {
    const Matrix innovation = C * sigma * C.transpose() + sigma_v;
    return spd_solve(innovation, C * sigma, ErrorKind::SingularInnovation).transpose();
}

} // namespace

void validate_model(const Model& model) {
    const std::size_t K = model.K;
    if (K == 0 || model.n == 0 || model.m == 0 || model.s == 0)
        throw Error(ErrorKind::DimensionMismatch, "K, n, m and s must be positive");
    check_count(model.A, K, "A");
    check_count(model.B, K, "B");
    check_count(model.C, K, "C");
    check_count(model.D, K - 1, "D");
    check_count(model.T, K + 1, "T");
    check_count(model.R, K, "R");
    check_count(model.Sigma_w, K, "Sigma_w");
    check_count(model.Sigma_v, K, "Sigma_v");
    for (std::size_t k = 0; k < K; ++k) {
        check_shape(model.A[k], model.n, model.n, at("A", k));
        check_shape(model.B[k], model.n, model.m, at("B", k));
        check_shape(model.C[k], model.s, model.n, at("C", k));
        check_shape(model.R[k], model.m, model.m, at("R", k));
        check_shape(model.Sigma_w[k], model.n, model.n, at("Sigma_w", k));
        check_shape(model.Sigma_v[k], model.s, model.s, at("Sigma_v", k));
        require_symmetric(model.R[k], true, at("R", k).c_str());
        require_symmetric(model.Sigma_w[k], false, at("Sigma_w", k).c_str());
        require_symmetric(model.Sigma_v[k], true, at("Sigma_v", k).c_str());
    }
    for (std::size_t j = 0; j + 1 < K; ++j)
        check_shape(model.D[j], model.s, model.m, at("D", j));
    for (std::size_t k = 0; k <= K; ++k) {
        check_shape(model.T[k], model.n, model.n, at("T", k));
        require_symmetric(model.T[k], false, at("T", k).c_str());
    }
    if (static_cast<std::size_t>(model.m_x0.size()) != model.n)
        throw Error(ErrorKind::DimensionMismatch, "m_x0 has the wrong length");
    check_shape(model.Sigma_x0, model.n, model.n, "Sigma_x0");
    require_symmetric(model.Sigma_x0, false, "Sigma_x0");
}

Matrix predict_covariance(const Matrix& A, const Matrix& sigma, const Matrix& sigma_w) {
    return symmetrize(A * sigma * A.transpose() + sigma_w);
}

Matrix correct_covariance(const Matrix& C, const Matrix& sigma, const Matrix& sigma_v) {
    const Matrix gain = kalman_gain(C, sigma, sigma_v);
    return symmetrize(sigma - gain * C * sigma);
}

GaussianBelief kalman_init(const Model& model, const Vector& z0) {
    const Matrix& C = model.C[0];
    const Matrix gain = kalman_gain(C, model.Sigma_x0, model.Sigma_v[0]);
    GaussianBelief out;
    out.stage = 0;
    out.cov = symmetrize(model.Sigma_x0 - gain * C * model.Sigma_x0);
    out.mean = model.m_x0 + gain * (z0 - C * model.m_x0);
    return out;
}

GaussianBelief kalman_predict(const Model& model, const GaussianBelief& belief, const Vector& u) {
    const std::size_t k = belief.stage;
    if (k >= model.K)
        throw Error(ErrorKind::IndexOutOfRange, "cannot predict past stage " + std::to_string(model.K));
    GaussianBelief out;
    out.stage = k + 1;
    out.cov = predict_covariance(model.A[k], belief.cov, model.Sigma_w[k]);
    out.mean = model.A[k] * belief.mean + model.B[k] * u;
    return out;
}

GaussianBelief kalman_correct(const Model& model, const GaussianBelief& predicted, const Vector& u_prev,
                              const Vector& z) {
    const std::size_t k = predicted.stage;
    if (k == 0 || k >= model.K)
        throw Error(ErrorKind::IndexOutOfRange, "no measurement model at stage " + std::to_string(k));
    const Matrix& C = model.C[k];
    const Matrix gain = kalman_gain(C, predicted.cov, model.Sigma_v[k]);
    GaussianBelief out;
    out.stage = k;
    out.cov = symmetrize(predicted.cov - gain * C * predicted.cov);
    out.mean = predicted.mean + gain * (z - C * predicted.mean - model.D[k - 1] * u_prev);
    return out;
}

GainSchedule lqr_gains(const Model& model) {
    const std::size_t K = model.K;
    GainSchedule g;
    g.L.resize(K);
    g.P.resize(K);
    g.K.resize(K + 1);
    g.K[K] = model.T[K];
    for (std::size_t k = K; k-- > 0;) {
        const Matrix& A = model.A[k];
        const Matrix& B = model.B[k];
        const Matrix& next = g.K[k + 1];
        const Matrix weight = model.R[k] + B.transpose() * next * B;
        g.L[k] = spd_solve(weight, B.transpose() * next * A, ErrorKind::SingularControlWeight);
        g.P[k] = A.transpose() * next * B * g.L[k];
        g.K[k] = symmetrize(A.transpose() * next * A - g.P[k] + model.T[k]);
    }
    return g;
}

Vector lqg_control(const GainSchedule& gains, const GaussianBelief& belief) {
    if (belief.stage >= gains.L.size())
        throw Error(ErrorKind::IndexOutOfRange, "no gain at stage " + std::to_string(belief.stage));
    return -gains.L[belief.stage] * belief.mean;
}

std::vector<CovariancePair> precompute_covariances(const Model& model) {
    std::vector<CovariancePair> out;
    out.reserve(model.K);
    Matrix predicted = model.Sigma_x0;
    for (std::size_t k = 0; k < model.K; ++k) {
        if (k > 0)
            predicted = predict_covariance(model.A[k - 1], out.back().filtered, model.Sigma_w[k - 1]);
        // Same arithmetic as kalman_init / kalman_correct, so trajectories agree bit-for-bit.
        const Matrix& C = model.C[k];
        const Matrix gain = kalman_gain(C, predicted, model.Sigma_v[k]);
        Matrix filtered = symmetrize(predicted - gain * C * predicted);
        out.push_back({predicted, std::move(filtered)});
    }
    return out;
}

Vector sample_gaussian(CounterRng& rng, const Vector& mean, const Matrix& cov) {
    Vector normal(mean.size());
    for (Eigen::Index i = 0; i < normal.size(); ++i)
        normal[i] = rng.standard_normal();
    return mean + symmetric_sqrt(cov) * normal;
}

Trajectory simulate_lqg(const Model& model, const GainSchedule& gains, std::uint64_t seed) {
    const std::size_t K = model.K;
    CounterRng rng(seed);
    const Vector zero_s = Vector::Zero(static_cast<Eigen::Index>(model.s));
    const Vector zero_n = Vector::Zero(static_cast<Eigen::Index>(model.n));

    Trajectory traj;
    Vector x = sample_gaussian(rng, model.m_x0, model.Sigma_x0);
    Vector z = model.C[0] * x + sample_gaussian(rng, zero_s, model.Sigma_v[0]);
    GaussianBelief belief = kalman_init(model, z);
    traj.states.push_back(x);
    traj.measurements.push_back(z);

    for (std::size_t k = 0; k < K; ++k) {
        const Vector u = lqg_control(gains, belief);
        const double stage_cost = x.dot(model.T[k] * x) + u.dot(model.R[k] * u);
        traj.stage_costs.push_back(stage_cost);
        traj.controls.push_back(u);
        x = model.A[k] * x + model.B[k] * u + sample_gaussian(rng, zero_n, model.Sigma_w[k]);
        traj.states.push_back(x);
        if (k + 1 < K) {
            z = model.C[k + 1] * x + model.D[k] * u + sample_gaussian(rng, zero_s, model.Sigma_v[k + 1]);
            traj.measurements.push_back(z);
            belief = kalman_correct(model, kalman_predict(model, belief, u), u, z);
        }
    }
    traj.stage_costs.push_back(x.dot(model.T[K] * x));
    for (double c : traj.stage_costs)
        traj.total_cost += c;
    return traj;
}

MonteCarloEstimate monte_carlo_cost(const Model& model, const GainSchedule& gains, std::size_t n,
                                    std::uint64_t seed) {
    if (n == 0)
        throw Error(ErrorKind::InvalidParameters, "rollout count must be positive");
    std::vector<double> costs(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            costs[i] = simulate_lqg(model, gains, child_seed(seed, i)).total_cost;
    });
    return summarize(costs);
}

} // namespace sensorctl::lqg
