#include "scqm/stiefel.hpp"

#include <Eigen/QR>

namespace scqm {

double stiefel_defect(const Matrix& Q) {
    return (Q.transpose() * Q - Matrix::Identity(Q.cols(), Q.cols())).norm();
}

Matrix tangent_project(const Matrix& Q, const Matrix& G) {
    if (Q.rows() != G.rows() || Q.cols() != G.cols())
        throw std::invalid_argument("tangent_project: shape mismatch");
    const Matrix QtG = Q.transpose() * G;
    return G - Q * (0.5 * (QtG + QtG.transpose()));
}

Matrix retract_qr(const Matrix& Y) {
    const auto k = Y.cols();
    if (Y.rows() < k) throw std::invalid_argument("retract_qr: Y must have at least k rows");
    // Householder QR without pivoting keeps the map deterministic.
    Eigen::HouseholderQR<Matrix> qr(Y);
    Matrix Q = qr.householderQ() * Matrix::Identity(Y.rows(), k);
    const Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < k; ++j) {
        const double rjj = R(j, j);
        if (std::abs(rjj) < 1e-12)
            throw RankDeficiencyError("retract_qr: rank-deficient step (|R_jj| < 1e-12)");
        if (rjj < 0) Q.col(j) = -Q.col(j);
    }
    return Q;
}

}  // namespace scqm
