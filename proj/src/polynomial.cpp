#include "sensorctl/polynomial.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "sensorctl/error.hpp"

namespace sensorctl {
namespace {

// Parlett-Reinsch balancing with power-of-two scalings; leaves the
// eigenvalues unchanged and tames companion matrices with wide coefficient spread.
void balance(Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    constexpr double radix = 2.0;
    bool converged = false;
    while (!converged) {
        converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0;
            double r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i)
                    continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0)
                continue;
            const double s = c + r;
            double f = 1.0;
            double g = r / radix;
            while (c < g) {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix * radix;
            }
            if ((c + r) / f < 0.95 * s) {
                converged = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

std::complex<double> newton_polish(std::span<const double> coeffs, std::complex<double> root) {
    double x = root.real();
    for (int iter = 0; iter < 8; ++iter) {
        double p = 0.0;
        double dp = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) {
            dp = dp * x + p;
            p = p * x + coeffs[i];
        }
        if (dp == 0.0)
            break;
        const double step = p / dp;
        const double next = x - step;
        if (!std::isfinite(next))
            break;
        // Keep the polished value only while it actually reduces the residual.
        if (std::abs(horner(coeffs, next)) > std::abs(p))
            break;
        x = next;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x)))
            break;
    }
    return {x, root.imag()};
}

} // namespace

double horner(std::span<const double> coeffs, double x) noexcept {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;)
        acc = acc * x + coeffs[i];
    return acc;
}

std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs, double trim_ratio) {
    double largest = 0.0;
    for (double c : coeffs)
        largest = std::max(largest, std::abs(c));
    if (largest == 0.0)
        return {};

    std::size_t degree = coeffs.size() - 1;
    while (degree > 0 && std::abs(coeffs[degree]) < trim_ratio * largest)
        --degree;
    if (degree == 0)
        return {};

    // Monic companion matrix: ones on the subdiagonal, -c_i / c_deg in the last column.
    const auto n = static_cast<Eigen::Index>(degree);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i)
        companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i)
        companion(i, n - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs[degree];
    balance(companion);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::RootFinderFailure, "companion eigenvalue iteration did not converge");

    std::vector<std::complex<double>> roots;
    roots.reserve(degree);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::complex<double> r = solver.eigenvalues()[i];
        if (std::abs(r.imag()) <= 1e-8 * (1.0 + std::abs(r.real())))
            r = newton_polish(coeffs, r);
        roots.push_back(r);
    }
    return roots;
}

} // namespace sensorctl
