#pragma once

#include "scqm/types.hpp"

namespace scqm {

// ||Q^T Q - I||_F, the orthonormality defect of a Stiefel point.
double stiefel_defect(const Matrix& Q);

// Projection of a Euclidean gradient G onto the tangent space at Q:
// G - Q sym(Q^T G). Q^T of the result is skew-symmetric.
Matrix tangent_project(const Matrix& Q, const Matrix& G);

// Sign-fixed thin QR retraction: Householder QR of Y with the columns of the
// orthogonal factor flipped so the triangular factor has a positive
// diagonal. Unique and continuous; maps an orthonormal Y to itself.
// Throws RankDeficiencyError when some |R_ii| < 1e-12.
Matrix retract_qr(const Matrix& Y);

}  // namespace scqm
