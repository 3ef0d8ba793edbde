#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scqm/datagen.hpp"
#include "scqm/loss.hpp"
#include "scqm/quadmap.hpp"
#include "scqm/types.hpp"

namespace scqm {

struct FitConfig {
    int max_iters = 1000;
    double tol = 1e-8;          // stop when relative objective decrease < tol
    double eta_q = 1e-2;        // initial per-block step sizes
    double eta_theta = 1e-2;
    double eta_c = 1e-2;
    double eta_tau = 1e-2;
    double armijo_alpha = 0.1;
    double shrink = 0.5;        // backtracking factor beta
    double growth = 2.0;        // step regrowth factor gamma after acceptance
    int max_backtracks = 30;
    std::uint64_t seed = 0;
    double theta_init_sigma = 1e-2;

    void validate() const;
};

struct IterationStat {
    int iteration = 0;
    double objective = 0.0;     // after this iteration's block updates
    double eta_q = 0.0;         // accepted step sizes (0 when the block was skipped)
    double eta_theta = 0.0;
    double eta_c = 0.0;
    double mean_eta_tau = 0.0;
    double res_q = 0.0;         // gradient norms at iteration start
    double res_theta = 0.0;
    double res_c = 0.0;
    double res_tau_max = 0.0;
    double orth_defect = 0.0;   // ||Q'Q - I||_F after the Q update
};

struct KktResiduals {
    double res_q = 0.0;       // ||tangent_project(Q, grad_Q)||_F
    double res_theta = 0.0;   // ||grad_Theta||_F
    double res_c = 0.0;       // ||grad_c||
    double res_tau_max = 0.0; // max_i ||grad_tau_i||
};

struct FitTrace {
    double initial_objective = 0.0;
    std::vector<IterationStat> iterations;
    KktResiduals final_kkt;
    bool converged = false;
    std::vector<std::string> warnings;

    double final_objective() const {
        return iterations.empty() ? initial_objective : iterations.back().objective;
    }
};

struct FitResult {
    QuadraticModel model;
    LatentCoords taus;
    FitTrace trace;
};

// F = sum_i loss(f(tau_i) - x_i); losses are even so this equals the
// x_i - f(tau_i) convention.
double objective(const QuadraticModel& model, const LatentCoords& taus,
                 const Matrix& X, const LossSpec& loss);

// Euclidean block gradients of F with the other blocks fixed, using
// g_i = loss_gradient(f(tau_i) - x_i) and phi_i = vech(tau_i tau_i').
Vector grad_c(const QuadraticModel& model, const LatentCoords& taus,
              const Matrix& X, const LossSpec& loss);
Matrix grad_theta(const QuadraticModel& model, const LatentCoords& taus,
                  const Matrix& X, const LossSpec& loss);
Matrix grad_q(const QuadraticModel& model, const LatentCoords& taus,
              const Matrix& X, const LossSpec& loss);
Vector grad_tau(const QuadraticModel& model, const LatentCoords& taus,
                const Matrix& X, const LossSpec& loss, int i);

// Sufficient decrease test: F_new <= F_old - alpha * eta * grad_sq_norm.
bool armijo_accept(double f_old, double f_new, double eta, double grad_sq_norm,
                   double alpha);

KktResiduals kkt_residuals(const QuadraticModel& model, const LatentCoords& taus,
                           const Matrix& X, const LossSpec& loss);

// Riemannian/Euclidean block descent. Per iteration: Q update (tangent
// projection + QR retraction), then Theta, then c, then each tau_i, each block
// stepping along its gradient at the state it starts from. Each block
// backtracks its own step; accepted steps regrow by cfg.growth next iteration,
// capped at 100x the initial value. freeze_theta keeps Theta = 0 and skips its
// update.
FitResult fit(const Matrix& X, int d, int s, const LossSpec& loss,
              const FitConfig& cfg = {}, bool freeze_theta = false);
FitResult fit(const Dataset& data, int d, int s, const LossSpec& loss,
              const FitConfig& cfg = {}, bool freeze_theta = false);

}  // namespace scqm
