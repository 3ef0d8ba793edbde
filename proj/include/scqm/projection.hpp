#pragma once

#include "scqm/loss.hpp"
#include "scqm/optimizer.hpp"
#include "scqm/quadmap.hpp"
#include "scqm/types.hpp"

namespace scqm {

struct ProjectResult {
    Vector tau;        // stationary latent coordinate
    Vector y_hat;      // f(tau)
    double objective = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Minimizes tau -> loss(f(tau) - y) by Armijo-backtracked gradient descent
// from tau0 = U'(y - c). Converged when ||J' grad_loss|| < cfg.tol * max(1,
// ||y||). multistarts > 0 adds that many perturbed initializations (seeded by
// cfg.seed) and returns the lowest-objective result; the problem is nonconvex
// away from the model so the canonical start can sit on a ridge.
ProjectResult project(const QuadraticModel& model, const Vector& y,
                      const LossSpec& loss, const FitConfig& cfg = {},
                      int multistarts = 0);

}  // namespace scqm
