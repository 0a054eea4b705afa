#pragma once

#include <Eigen/Dense>

#include "sensorctl/error.hpp"

namespace sensorctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Tolerance ladder for symmetric matrices.
inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kPdFloor = 1e-12;

[[nodiscard]] inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

[[nodiscard]] bool is_symmetric(const Matrix& m, double tol = kSymmetryTol);

/// Smallest eigenvalue of the symmetric part of a square matrix.
[[nodiscard]] double min_eigenvalue(const Matrix& m);

/// Throws InvalidParameters unless `m` is square, symmetric and
/// min-eigenvalue >= -kPsdTol (or >= kPdFloor when `positive_definite`).
void require_symmetric(const Matrix& m, bool positive_definite, const char* what);

/// Solves S X = rhs for symmetric positive-definite S without forming S^{-1}.
/// Throws `on_failure` when S is numerically singular or indefinite.
[[nodiscard]] Matrix spd_solve(const Matrix& s, const Matrix& rhs, ErrorKind on_failure);

/// Symmetric square root with negative eigenvalues clipped to zero.
[[nodiscard]] Matrix symmetric_sqrt(const Matrix& m);

} // namespace sensorctl
