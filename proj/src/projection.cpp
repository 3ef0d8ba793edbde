#include "scqm/projection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scqm/datagen.hpp"

namespace scqm {

namespace {

ProjectResult descend(const QuadraticModel& model, const Vector& y,
                      const LossSpec& loss, const FitConfig& cfg,
                      const Vector& tau0) {
    const double grad_tol = cfg.tol * std::max(1.0, y.norm());
    ProjectResult res;
    res.tau = tau0;
    res.objective = loss_value(loss, evaluate(model, res.tau) - y);

    double eta = cfg.eta_tau;
    for (int t = 0; t < cfg.max_iters; ++t) {
        const Vector g = loss_gradient(loss, evaluate(model, res.tau) - y);
        const Vector dir = jacobian_tau(model, res.tau).transpose() * g;
        res.grad_norm = dir.norm();
        if (res.grad_norm < grad_tol) {
            res.converged = true;
            break;
        }
        const double dir_sq = dir.squaredNorm();
        bool accepted = false;
        double trial = eta;
        for (int b = 0; b <= cfg.max_backtracks; ++b) {
            const Vector tau_try = res.tau - trial * dir;
            const double f_try = loss_value(loss, evaluate(model, tau_try) - y);
            if (armijo_accept(res.objective, f_try, trial, dir_sq, cfg.armijo_alpha)) {
                res.tau = tau_try;
                res.objective = f_try;
                eta = std::min(trial * cfg.growth, cfg.eta_tau * 100.0);
                accepted = true;
                break;
            }
            trial *= cfg.shrink;
        }
        res.iterations = t + 1;
        if (!accepted) break;  // no usable step left; report unconverged
    }
    if (!res.converged) {
        const Vector g = loss_gradient(loss, evaluate(model, res.tau) - y);
        res.grad_norm = (jacobian_tau(model, res.tau).transpose() * g).norm();
        res.converged = res.grad_norm < grad_tol;
    }
    res.y_hat = evaluate(model, res.tau);
    return res;
}

}  // namespace

ProjectResult project(const QuadraticModel& model, const Vector& y,
                      const LossSpec& loss, const FitConfig& cfg,
                      int multistarts) {
    cfg.validate();
    if (static_cast<int>(y.size()) != model.ambient_dim())
        throw std::invalid_argument("project: point dimension mismatch");
    if (!y.allFinite())
        throw std::invalid_argument("project: point has non-finite entries");
    if (multistarts < 0)
        throw std::invalid_argument("project: multistarts must be >= 0");

    const Vector tau0 = model.U().transpose() * (y - model.c);
    ProjectResult best = descend(model, y, loss, cfg, tau0);

    const double sigma = 0.5 * std::max(1.0, tau0.norm());
    for (int k = 0; k < multistarts; ++k) {
        Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(k) + 1);
        Vector start = tau0;
        for (int i = 0; i < start.size(); ++i) start[i] += sigma * rng.normal();
        ProjectResult cand = descend(model, y, loss, cfg, start);
        if (cand.objective < best.objective) best = cand;
    }
    return best;
}

}  // namespace scqm
