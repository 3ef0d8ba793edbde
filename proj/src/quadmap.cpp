#include "scqm/quadmap.hpp"

#include <cmath>

namespace scqm {

double QuadraticModel::orthonormality_defect() const {
    const auto k = Q.cols();
    return (Q.transpose() * Q - Matrix::Identity(k, k)).norm();
}

void QuadraticModel::validate() const {
    const int D = ambient_dim();
    if (d < 1) throw std::invalid_argument("model: latent dimension d must be >= 1");
    if (s < 0) throw std::invalid_argument("model: normal dimension s must be >= 0");
    if (D < d + s) throw std::invalid_argument("model: ambient dimension must be >= d+s");
    if (Q.rows() != D || Q.cols() != d + s)
        throw std::invalid_argument("model: Q must be D x (d+s)");
    if (Theta.rows() != vech_size(d) || Theta.cols() != s)
        throw std::invalid_argument("model: Theta must be d(d+1)/2 x s");
    if (orthonormality_defect() > 1e-8)
        throw std::invalid_argument("model: Q columns are not orthonormal");
}

int vech_size(int d) { return d * (d + 1) / 2; }

int vech_index(int i, int j, int d) {
    if (i < 0 || j < i || j >= d)
        throw std::invalid_argument("vech_index: requires 0 <= i <= j < d");
    // Rows before row i hold d, d-1, ..., d-i+1 entries.
    return i * d - i * (i - 1) / 2 + (j - i);
}

Vector vech(const Matrix& S) {
    if (S.rows() != S.cols()) throw std::invalid_argument("vech: matrix must be square");
    const int d = static_cast<int>(S.rows());
    Vector v(vech_size(d));
    int pos = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) v[pos++] = S(i, j);
    return v;
}

Matrix unvech(const Vector& v, int d) {
    if (v.size() != vech_size(d)) throw std::invalid_argument("unvech: size mismatch");
    Matrix S(d, d);
    int pos = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) S(i, j) = S(j, i) = v[pos++];
    return S;
}

Vector evaluate(const QuadraticModel& model, const Vector& tau) {
    if (tau.size() != model.d) throw std::invalid_argument("evaluate: tau dimension mismatch");
    Vector out = model.c + model.U() * tau;
    if (model.s > 0) out += model.V() * (model.Theta.transpose() * vech(tau * tau.transpose()));
    return out;
}

Matrix build_M(const Vector& tau) {
    const int d = static_cast<int>(tau.size());
    Matrix M = Matrix::Zero(vech_size(d), d);
    int row = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) M(row++, j) = tau[i];
    return M;
}

Matrix build_N(const Vector& tau) {
    const int d = static_cast<int>(tau.size());
    Matrix N = Matrix::Zero(vech_size(d), d);
    int row = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) N(row++, i) = tau[j];
    return N;
}

Matrix jacobian_tau(const QuadraticModel& model, const Vector& tau) {
    if (tau.size() != model.d) throw std::invalid_argument("jacobian_tau: tau dimension mismatch");
    Matrix J = model.U();
    if (model.s > 0) J += model.V() * (model.Theta.transpose() * (build_M(tau) + build_N(tau)));
    return J;
}

SymQuadTensor theta_to_tensor(const Matrix& Theta, int d) {
    if (Theta.rows() != vech_size(d))
        throw std::invalid_argument("theta_to_tensor: Theta rows must equal d(d+1)/2");
    SymQuadTensor A;
    const int s = static_cast<int>(Theta.cols());
    A.slices.reserve(s);
    for (int k = 0; k < s; ++k) {
        Matrix slice(d, d);
        for (int i = 0; i < d; ++i) {
            slice(i, i) = Theta(vech_index(i, i, d), k);
            for (int j = i + 1; j < d; ++j)
                slice(i, j) = slice(j, i) = 0.5 * Theta(vech_index(i, j, d), k);
        }
        A.slices.push_back(std::move(slice));
    }
    return A;
}

Matrix tensor_to_theta(const SymQuadTensor& A) {
    const int d = A.d();
    const int s = A.s();
    Matrix Theta(vech_size(d), s);
    for (int k = 0; k < s; ++k) {
        const Matrix& slice = A.slices[k];
        if (slice.rows() != d || slice.cols() != d)
            throw std::invalid_argument("tensor_to_theta: inconsistent slice shapes");
        for (int i = 0; i < d; ++i) {
            Theta(vech_index(i, i, d), k) = slice(i, i);
            for (int j = i + 1; j < d; ++j)
                Theta(vech_index(i, j, d), k) = 2.0 * slice(i, j);
        }
    }
    return Theta;
}

std::vector<Matrix> hessian_f(const QuadraticModel& model) {
    const int D = model.ambient_dim();
    const SymQuadTensor A = theta_to_tensor(model.Theta, model.d);
    std::vector<Matrix> H(D, Matrix::Zero(model.d, model.d));
    for (int r = 0; r < D; ++r)
        for (int t = 0; t < model.s; ++t) H[r] += 2.0 * model.V()(r, t) * A.slices[t];
    return H;
}

Matrix conjugation_matrix(const Matrix& R) {
    if (R.rows() != R.cols()) throw std::invalid_argument("conjugation_matrix: R must be square");
    const int d = static_cast<int>(R.rows());
    if ((R.transpose() * R - Matrix::Identity(d, d)).norm() > 1e-10)
        throw std::invalid_argument("conjugation_matrix: R must be orthogonal");
    const int m = vech_size(d);
    Matrix S(m, m);
    // Column (i,j) is the image of the symmetric basis matrix B with
    // vech(B) = e_(i,j): B = E_ii on the diagonal, E_ij + E_ji off it.
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            Matrix B = Matrix::Zero(d, d);
            B(i, j) = 1.0;
            B(j, i) = 1.0;
            S.col(vech_index(i, j, d)) = vech(R * B * R.transpose());
        }
    }
    return S;
}

QuadraticModel reparameterize(const QuadraticModel& model, const Matrix& R) {
    const Matrix S = conjugation_matrix(R);
    QuadraticModel out = model;
    out.Q.leftCols(model.d) = model.U() * R.transpose();
    if (model.s > 0) {
        Eigen::FullPivLU<Matrix> lu(S.transpose());
        if (!lu.isInvertible())
            throw NumericalError("reparameterize: conjugation matrix is singular");
        out.Theta = lu.solve(model.Theta);
    }
    return out;
}

}  // namespace scqm
