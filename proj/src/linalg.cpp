#include "sensorctl/linalg.hpp"

#include <string>

namespace sensorctl {

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols())
        return false;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Matrix& m) {
    if (m.size() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void require_symmetric(const Matrix& m, bool positive_definite, const char* what) {
    if (m.rows() != m.cols())
        throw Error(ErrorKind::DimensionMismatch, std::string(what) + " is not square");
    if (!is_symmetric(m))
        throw Error(ErrorKind::InvalidParameters, std::string(what) + " is not symmetric");
    const double lo = min_eigenvalue(m);
    if (positive_definite ? lo < kPdFloor : lo < -kPsdTol)
        throw Error(ErrorKind::InvalidParameters,
                    std::string(what) + (positive_definite ? " is not positive definite"
                                                           : " is not positive semi-definite"));
}

Matrix spd_solve(const Matrix& s, const Matrix& rhs, ErrorKind on_failure) {
    Eigen::LLT<Matrix> llt(symmetrize(s));
    if (llt.info() != Eigen::Success)
        throw Error(on_failure, "matrix is not numerically positive definite");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    const Eigen::VectorXd diag = Matrix(llt.matrixL()).diagonal();
    if (diag.minCoeff() * diag.minCoeff() < 1e-14 * scale)
        throw Error(on_failure, "matrix is numerically singular");
    return llt.solve(rhs);
}

Matrix symmetric_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m));
    const Vector roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

} // namespace sensorctl
