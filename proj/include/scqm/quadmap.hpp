#pragma once

#include <vector>

#include "scqm/types.hpp"

namespace scqm {

// Parameters of the quadratic map
//   f(tau) = c + U tau + V Theta^T vech(tau tau^T),
// with Q = [U, V] column-orthonormal, U the d tangent columns and V the s
// normal columns. m = d(d+1)/2 rows in Theta. s = 0 degenerates to a linear
// (affine subspace) model with an empty Theta.
struct QuadraticModel {
    Vector c;      // D
    Matrix Q;      // D x (d+s)
    Matrix Theta;  // m x s
    int d = 0;
    int s = 0;

    int ambient_dim() const { return static_cast<int>(c.size()); }
    auto U() const { return Q.leftCols(d); }
    auto V() const { return Q.rightCols(s); }

    double orthonormality_defect() const;  // ||Q^T Q - I||_F

    // Throws std::invalid_argument on shape inconsistencies or an
    // orthonormality defect above 1e-8.
    void validate() const;
};

// Quadratic coefficients as a tensor of s symmetric d x d slices.
struct SymQuadTensor {
    std::vector<Matrix> slices;

    int d() const { return slices.empty() ? 0 : static_cast<int>(slices.front().rows()); }
    int s() const { return static_cast<int>(slices.size()); }
};

// vech ordering: row-major upper triangle, pairs
// (0,0), (0,1), ..., (0,d-1), (1,1), ..., (d-1,d-1).
int vech_size(int d);
int vech_index(int i, int j, int d);  // 0-based, requires 0 <= i <= j < d
Vector vech(const Matrix& S);         // reads entries with row <= col
Matrix unvech(const Vector& v, int d);  // symmetric matrix with the given upper triangle

Vector evaluate(const QuadraticModel& model, const Vector& tau);

// Sparse matrices representing delta -> vech(tau delta^T) and
// delta -> vech(delta tau^T); one nonzero per row. Their sum is the
// Jacobian of tau -> vech(tau tau^T).
Matrix build_M(const Vector& tau);  // m x d
Matrix build_N(const Vector& tau);  // m x d

// d f / d tau = U + V Theta^T (M_tau + N_tau), a D x d matrix.
Matrix jacobian_tau(const QuadraticModel& model, const Vector& tau);

// Theta <-> tensor with halved off-diagonals, so that
// sum_{u,v} A_{k,u,v} tau_u tau_v = (Theta^T vech(tau tau^T))_k.
SymQuadTensor theta_to_tensor(const Matrix& Theta, int d);
Matrix tensor_to_theta(const SymQuadTensor& A);

// Constant second derivative of f: D slices of size d x d,
// slice r = 2 sum_t V(r,t) A_t.
std::vector<Matrix> hessian_f(const QuadraticModel& model);

// The m x m matrix S(R) with vech((R tau)(R tau)^T) = S(R) vech(tau tau^T)
// for every tau. Requires R orthogonal.
Matrix conjugation_matrix(const Matrix& R);

// Equivalent model under the latent rotation eta = R tau:
// U <- U R^T, Theta <- solve(S(R)^T, Theta); c and V unchanged.
// Satisfies evaluate(model, tau) == evaluate(result, R tau).
QuadraticModel reparameterize(const QuadraticModel& model, const Matrix& R);

}  // namespace scqm
