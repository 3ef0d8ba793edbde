#pragma once

#include "scqm/datagen.hpp"
#include "scqm/loss.hpp"
#include "scqm/optimizer.hpp"
#include "scqm/quadmap.hpp"
#include "scqm/types.hpp"

namespace scqm {

// Latent Hessian of tau -> loss(f(tau) - x):
// H(tau) = J' * hess_loss(y) * J + sum_r grad_loss(y)_r * (hess f)_r,
// with J = jacobian_tau and y = f(tau) - x.
Matrix hessian_tau(const QuadraticModel& model, const Vector& x,
                   const Vector& tau, const LossSpec& loss);

struct ConvexityCertificate {
    double r_p = 0.0;              // +inf when A0 == 0
    double rho = 0.0;              // min_j |residual_j|^{p-2} over kept samples
    double sigma0 = 1.0;
    double A0 = 0.0;               // max_s spectral norm of tensor slice A_s
    double p = 2.0;
    int samples_checked = 0;       // samples inside the ball
    double min_eig_observed = 0.0; // NaN when no sample fell inside
    int samples_outside = 0;
    double min_eig_outside = 0.0;  // NaN when every sample fell inside
};

ConvexityCertificate convexity_radius(double p, double rho, double sigma0,
                                      double A0);

double tensor_max_slice_norm(const SymQuadTensor& A);

// Samples latent points around U'(x - c), splits them by the certificate ball
// ||f(tau) - x||_{p-1} <= r_p, and records the extreme Hessian eigenvalues on
// both sides. rho is estimated from the kept samples themselves; a sample
// stays kept only if it satisfies both certificate assumptions under the
// final (rho, r_p) pair.
ConvexityCertificate verify_convexity_ball(const QuadraticModel& model,
                                           const Vector& x, const LossSpec& loss,
                                           int n_samples, Rng& rng,
                                           double spread = 1.0);

struct FrechetResult {
    Vector c;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Minimizer of sum_i loss(c - x_i) by Armijo-backtracked gradient descent from
// the sample mean; converged when the gradient norm drops below cfg.tol.
FrechetResult frechet_mean(const Matrix& X, const LossSpec& loss,
                           const FitConfig& cfg = {});

// First-order predicted change of the Frechet mean under data perturbations:
// delta_c = H^{-1} sum_i hess_loss(r_i*) delta_i, H = sum_i hess_loss(r_i*).
Vector sensitivity(const Matrix& X, const LossSpec& loss, const Matrix& deltas,
                   const FitConfig& cfg = {});

// The same quantity for the l2 loss via the explicit projector form
// delta_c = H^{-1} sum_i (1/||r_i*||) (I - rr'/||r||^2) delta_i.
Vector l2_sensitivity_decomposition(const Matrix& X, const Matrix& deltas,
                                    const FitConfig& cfg = {});

}  // namespace scqm
