#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sensorctl {

/// p(x) for coefficients in ascending order (coeffs[i] multiplies x^i).
[[nodiscard]] double horner(std::span<const double> coeffs, double x) noexcept;

/// Roots of a real polynomial (ascending coefficients) as eigenvalues of its
/// balanced companion matrix. Leading coefficients below
/// trim_ratio * max|coeff| are dropped first, so a polynomial whose top terms
/// vanish numerically is solved at its effective degree. Real-looking roots
/// are polished by Newton steps on the untrimmed polynomial.
/// Throws RootFinderFailure if the eigenvalue iteration does not converge.
[[nodiscard]] std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs,
                                                                 double trim_ratio = 1e-12);

} // namespace sensorctl
