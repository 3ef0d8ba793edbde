#pragma once

#include <string>

#include "scqm/types.hpp"

namespace scqm {

enum class LossKind { L1, L2, L2Squared, LpP, Mahalanobis, Huber };

// Description of one loss function acting on a residual vector r.
//
// Immutable after construction; the Mahalanobis metric is validated
// (symmetric positive definite) once in the factory, not per call.
// eps_guard regularizes the singular Hessians: for lpp with p < 2 each
// |r_k| below eps_guard is floored at eps_guard, and for l2 with
// ||r|| < eps_guard the Hessian becomes (1/eps_guard) I.
class LossSpec {
public:
    static LossSpec l1();
    static LossSpec l2(double eps_guard = 1e-12);
    static LossSpec l2_squared();
    static LossSpec lpp(double p, double eps_guard = 1e-12);  // requires p >= 1
    static LossSpec mahalanobis(const Matrix& M);             // M symmetric positive definite
    static LossSpec huber(double delta);                      // requires delta > 0

    LossKind kind() const { return kind_; }
    double p() const { return p_; }
    double delta() const { return delta_; }
    const Matrix& metric() const { return M_; }
    double eps_guard() const { return eps_guard_; }

    // Short tag used by CLI flags and model files, e.g. "l2", "lpp:p=1.5",
    // "huber:delta=1". parse() accepts the same grammar; the Mahalanobis
    // loss carries a matrix and is only constructible programmatically.
    std::string to_string() const;
    static LossSpec parse(const std::string& text);

private:
    explicit LossSpec(LossKind kind) : kind_(kind) {}

    LossKind kind_;
    double p_ = 2.0;
    double delta_ = 1.0;
    Matrix M_;
    double eps_guard_ = 1e-12;
};

// Value, gradient and Hessian of the loss at residual r. At nonsmooth points
// the gradient is the minimum-norm subgradient: 0 for l1 coordinates at zero
// and for l2 at r = 0.
double loss_value(const LossSpec& loss, const Vector& r);
Vector loss_gradient(const LossSpec& loss, const Vector& r);
Matrix loss_hessian(const LossSpec& loss, const Vector& r);

}  // namespace scqm
