#pragma once

// Finite-horizon linear-quadratic-Gaussian regulator: Kalman filter,
// backward gain recursion, certainty-equivalent control and a seeded
// closed-loop simulator.
//
//   x_{k+1} = A_k x_k + B_k u_k + w_k,          w_k ~ N(0, Sigma_w_k)
//   z_0     = C_0 x_0 + v_0
//   z_k     = C_k x_k + D_{k-1} u_{k-1} + v_k,  v_k ~ N(0, Sigma_v_k)
//   cost    = sum_{k<K} (x_k' T_k x_k + u_k' R_k u_k) + x_K' T_K x_K

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sensorctl/linalg.hpp"
#include "sensorctl/rng.hpp"
#include "sensorctl/stats.hpp"

namespace sensorctl::lqg {

struct Model {
    std::size_t K = 0;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t s = 0;
    std::vector<Matrix> A;       ///< K entries, n x n
    std::vector<Matrix> B;       ///< K entries, n x m
    std::vector<Matrix> C;       ///< K entries, s x n (C_0 .. C_{K-1})
    std::vector<Matrix> D;       ///< K-1 entries, s x m; D[j] multiplies u_j in z_{j+1}
    std::vector<Matrix> T;       ///< K+1 entries, n x n symmetric PSD (T_K terminal)
    std::vector<Matrix> R;       ///< K entries, m x m symmetric PD
    std::vector<Matrix> Sigma_w; ///< K entries, n x n symmetric PSD
    std::vector<Matrix> Sigma_v; ///< K entries, s x s symmetric PD
    Vector m_x0;
    Matrix Sigma_x0;
};

struct GaussianBelief {
    std::size_t stage = 0;
    Vector mean;
    Matrix cov;
};

/// L_k, P_k for k < K; K_k for k <= K (K_K = T_K).
struct GainSchedule {
    std::vector<Matrix> L;
    std::vector<Matrix> P;
    std::vector<Matrix> K;
};

struct CovariancePair {
    Matrix predicted; ///< Sigma_{k|k-1}; Sigma_x0 at k = 0
    Matrix filtered;  ///< Sigma_{k|k}
};

struct Trajectory {
    std::vector<Vector> states;       ///< K + 1 entries
    std::vector<Vector> controls;     ///< K entries
    std::vector<Vector> measurements; ///< K entries
    std::vector<double> stage_costs;  ///< K + 1 entries; the last is the terminal cost
    double total_cost = 0.0;
};

/// Throws DimensionMismatch or InvalidParameters.
void validate_model(const Model& model);

/// Covariance-only prediction: A Sigma A' + Sigma_w, symmetrized.
[[nodiscard]] Matrix predict_covariance(const Matrix& A, const Matrix& sigma, const Matrix& sigma_w);

/// Covariance-only correction: Sigma - Sigma C' (C Sigma C' + Sigma_v)^{-1} C Sigma,
/// by a positive-definite solve, symmetrized. Throws SingularInnovation.
[[nodiscard]] Matrix correct_covariance(const Matrix& C, const Matrix& sigma, const Matrix& sigma_v);

[[nodiscard]] GaussianBelief kalman_init(const Model& model, const Vector& z0);
[[nodiscard]] GaussianBelief kalman_predict(const Model& model, const GaussianBelief& belief, const Vector& u);
[[nodiscard]] GaussianBelief kalman_correct(const Model& model, const GaussianBelief& predicted,
                                            const Vector& u_prev, const Vector& z);

[[nodiscard]] GainSchedule lqr_gains(const Model& model);

/// u_k = -L_k m_{k|k}.
[[nodiscard]] Vector lqg_control(const GainSchedule& gains, const GaussianBelief& belief);

/// (Sigma_{k|k-1}, Sigma_{k|k}) for k = 0..K-1 from the covariance lines alone.
[[nodiscard]] std::vector<CovariancePair> precompute_covariances(const Model& model);

/// Draws x ~ N(mean, cov) using the clipped symmetric square root of cov.
[[nodiscard]] Vector sample_gaussian(CounterRng& rng, const Vector& mean, const Matrix& cov);

/// Closed-loop run of filter plus gains; deterministic given seed.
[[nodiscard]] Trajectory simulate_lqg(const Model& model, const GainSchedule& gains, std::uint64_t seed);

/// Mean realized cost of n runs; run i uses child_seed(seed, i).
[[nodiscard]] MonteCarloEstimate monte_carlo_cost(const Model& model, const GainSchedule& gains, std::size_t n,
                                                  std::uint64_t seed);

} // namespace sensorctl::lqg
