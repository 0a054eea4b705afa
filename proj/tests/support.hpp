#pragma once

// Random instance generators shared by the test suites.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "sensorctl/direct_control.hpp"
#include "sensorctl/linalg.hpp"
#include "sensorctl/lqg.hpp"
#include "sensorctl/pomdp.hpp"
#include "sensorctl/scheduling.hpp"

namespace testing_support {

using sensorctl::Matrix;
using sensorctl::Vector;

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline double log_uniform(std::mt19937_64& g, double lo, double hi) {
    return std::exp(uniform(g, std::log(lo), std::log(hi)));
}

inline std::size_t index_in(std::mt19937_64& g, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
}

inline Matrix random_matrix(std::mt19937_64& g, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = uniform(g, -scale, scale);
    return m;
}

/// Symmetric positive definite with eigenvalues at least `floor`.
inline Matrix random_spd(std::mt19937_64& g, std::size_t n, double floor = 0.1) {
    const Matrix a = random_matrix(g, n, n);
    return sensorctl::symmetrize(a * a.transpose() + floor * Matrix::Identity(a.rows(), a.cols()));
}

/// Row-stochastic with strictly positive entries unless `sparse`, which
/// zeroes roughly a third of the entries (keeping one per row).
inline Matrix random_stochastic(std::mt19937_64& g, std::size_t rows, std::size_t cols, bool sparse = false) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const auto keep = static_cast<Eigen::Index>(index_in(g, 0, cols - 1));
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const bool zero = sparse && c != keep && uniform(g, 0.0, 1.0) < 0.33;
            m(r, c) = zero ? 0.0 : uniform(g, 0.05, 1.0);
        }
        m.row(r) /= m.row(r).sum();
    }
    return m;
}

/// Finite PO-MDP with the given horizon and per-stage sizes drawn from [lo, hi].
inline sensorctl::pomdp::Model random_pomdp(std::mt19937_64& g, std::size_t K, std::size_t n, std::size_t m,
                                            std::size_t s, bool sparse = false) {
    sensorctl::pomdp::Model model;
    for (std::size_t k = 0; k < K; ++k) {
        sensorctl::pomdp::Stage st;
        st.n = n;
        st.m = m;
        st.s = s;
        for (std::size_t u = 0; u < m; ++u) {
            st.F.push_back(random_stochastic(g, n, n, sparse));
            st.G.push_back(random_matrix(g, n, n, 5.0));
            if (k > 0)
                st.H.push_back(random_stochastic(g, n, s, sparse));
        }
        model.stages.push_back(std::move(st));
    }
    model.H0 = random_stochastic(g, n, s, sparse);
    model.p0 = random_stochastic(g, 1, n).row(0).transpose();
    return model;
}

inline sensorctl::lqg::Model random_lqg(std::mt19937_64& g, std::size_t K, std::size_t n, std::size_t m,
                                        std::size_t s) {
    sensorctl::lqg::Model model;
    model.K = K;
    model.n = n;
    model.m = m;
    model.s = s;
    for (std::size_t k = 0; k < K; ++k) {
        model.A.push_back(random_matrix(g, n, n, 1.2));
        model.B.push_back(random_matrix(g, n, m));
        model.C.push_back(random_matrix(g, s, n));
        model.R.push_back(random_spd(g, m));
        model.Sigma_w.push_back(random_spd(g, n, 0.05));
        model.Sigma_v.push_back(random_spd(g, s, 0.05));
        model.T.push_back(random_spd(g, n, 0.0));
        if (k + 1 < K)
            model.D.push_back(random_matrix(g, s, m));
    }
    model.T.push_back(random_spd(g, n, 0.0));
    model.m_x0 = random_matrix(g, n, 1, 2.0).col(0);
    model.Sigma_x0 = random_spd(g, n, 0.1);
    return model;
}

/// Scalar K-stage model with every coefficient equal to one.
inline sensorctl::lqg::Model scalar_ones(std::size_t K) {
    const Matrix one = Matrix::Constant(1, 1, 1.0);
    sensorctl::lqg::Model model;
    model.K = K;
    model.n = model.m = model.s = 1;
    model.A.assign(K, one);
    model.B.assign(K, one);
    model.C.assign(K, one);
    model.D.assign(K - 1, Matrix::Zero(1, 1));
    model.T.assign(K + 1, one);
    model.R.assign(K, one);
    model.Sigma_w.assign(K, one);
    model.Sigma_v.assign(K, one);
    model.m_x0 = Vector::Zero(1);
    model.Sigma_x0 = one;
    return model;
}

/// Sensor menu over a random base model: K <= 6, n <= 2, up to three sensors
/// per stage. With `with_ties` each stage repeats its first sensor.
inline sensorctl::scheduling::SensorMenu random_menu(std::mt19937_64& g, bool with_ties = false) {
    const std::size_t K = index_in(g, 1, 6);
    const std::size_t n = index_in(g, 1, 2);
    const std::size_t s = index_in(g, 1, 2);
    sensorctl::scheduling::SensorMenu menu;
    menu.base = random_lqg(g, K, n, 1, s);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<sensorctl::scheduling::SensorOption> opts;
        const std::size_t count = index_in(g, 1, 3);
        for (std::size_t i = 0; i < count; ++i)
            opts.push_back({random_spd(g, s, 0.05), uniform(g, 0.0, 2.0)});
        if (with_ties)
            opts.push_back(opts.front());
        menu.options.push_back(std::move(opts));
    }
    return menu;
}

inline sensorctl::direct_control::ScalarTwoStageModel random_direct_model(std::mt19937_64& g) {
    auto sign = [&] { return uniform(g, 0.0, 1.0) < 0.5 ? -1.0 : 1.0; };
    sensorctl::direct_control::ScalarTwoStageModel m;
    m.m_x = uniform(g, -1.0, 1.0);
    m.sigma_x2 = log_uniform(g, 0.1, 4.0);
    m.a = sign() * uniform(g, 0.3, 1.5);
    m.b = sign() * uniform(g, 0.3, 1.5);
    m.sigma_w2 = log_uniform(g, 0.1, 4.0);
    m.c = sign() * uniform(g, 0.3, 1.5);
    m.d = uniform(g, -1.0, 1.0);
    m.sigma_v2 = log_uniform(g, 0.1, 4.0);
    m.gamma = log_uniform(g, 1e-3, 1e3);
    m.t = log_uniform(g, 0.2, 5.0);
    m.r = log_uniform(g, 0.2, 5.0);
    return m;
}

} // namespace testing_support
