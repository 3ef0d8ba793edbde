#include "scqm/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace scqm {

Matrix hessian_tau(const QuadraticModel& model, const Vector& x,
                   const Vector& tau, const LossSpec& loss) {
    if (static_cast<int>(x.size()) != model.ambient_dim())
        throw std::invalid_argument("hessian_tau: point dimension mismatch");
    if (static_cast<int>(tau.size()) != model.d)
        throw std::invalid_argument("hessian_tau: latent dimension mismatch");
    const Vector y = evaluate(model, tau) - x;
    const Matrix J = jacobian_tau(model, tau);
    Matrix H = J.transpose() * loss_hessian(loss, y) * J;
    if (model.s > 0) {
        const Vector g = loss_gradient(loss, y);
        const std::vector<Matrix> f2 = hessian_f(model);
        for (int r = 0; r < model.ambient_dim(); ++r) H += g[r] * f2[static_cast<size_t>(r)];
    }
    return H;
}

ConvexityCertificate convexity_radius(double p, double rho, double sigma0,
                                      double A0) {
    if (!(p > 1.0 && p <= 2.0))
        throw std::invalid_argument("convexity_radius: need 1 < p <= 2");
    if (!(rho > 0.0) || !(sigma0 > 0.0))
        throw std::invalid_argument("convexity_radius: rho and sigma0 must be positive");
    if (!(A0 >= 0.0))
        throw std::invalid_argument("convexity_radius: A0 must be nonnegative");
    ConvexityCertificate cert;
    cert.p = p;
    cert.rho = rho;
    cert.sigma0 = sigma0;
    cert.A0 = A0;
    cert.r_p = (A0 > 0.0)
                   ? std::pow((p - 1.0) * rho * sigma0 * sigma0 / (2.0 * A0),
                              1.0 / (p - 1.0))
                   : std::numeric_limits<double>::infinity();
    return cert;
}

double tensor_max_slice_norm(const SymQuadTensor& A) {
    double a0 = 0.0;
    for (const Matrix& slice : A.slices) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(slice);
        a0 = std::max(a0, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return a0;
}

namespace {

double lp_norm(const Vector& v, double q) {
    double acc = 0.0;
    for (int i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]), q);
    return std::pow(acc, 1.0 / q);
}

double min_eig(const Matrix& H) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    return es.eigenvalues().minCoeff();
}

}  // namespace

ConvexityCertificate verify_convexity_ball(const QuadraticModel& model,
                                           const Vector& x, const LossSpec& loss,
                                           int n_samples, Rng& rng,
                                           double spread) {
    if (loss.kind() != LossKind::LpP || !(loss.p() > 1.0 && loss.p() <= 2.0))
        throw std::invalid_argument(
            "verify_convexity_ball: loss must be lpp with 1 < p <= 2");
    if (n_samples < 1)
        throw std::invalid_argument("verify_convexity_ball: need n_samples >= 1");
    const double p = loss.p();
    const double q = p - 1.0;
    const Vector tau0 = model.U().transpose() * (x - model.c);

    struct Probe {
        Vector tau;
        double ball_norm;   // ||f(tau) - x||_{p-1}
        double min_weight;  // min_j |residual_j|^{p-2}
    };
    std::vector<Probe> probes;
    probes.reserve(static_cast<size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k) {
        Vector tau = tau0;
        for (int j = 0; j < tau.size(); ++j)
            tau[j] += spread * (2.0 * rng.uniform() - 1.0);
        const Vector r = evaluate(model, tau) - x;
        if ((r.cwiseAbs().array() == 0.0).any()) continue;  // assumption needs r_j != 0
        Probe pr;
        pr.tau = tau;
        pr.ball_norm = lp_norm(r, q);
        pr.min_weight = r.cwiseAbs().array().pow(p - 2.0).minCoeff();
        probes.push_back(std::move(pr));
    }

    const double a0 = (model.s > 0)
                          ? tensor_max_slice_norm(theta_to_tensor(model.Theta, model.d))
                          : 0.0;
    ConvexityCertificate cert;
    cert.p = p;
    cert.sigma0 = 1.0;
    cert.A0 = a0;
    cert.min_eig_observed = std::numeric_limits<double>::quiet_NaN();
    cert.min_eig_outside = std::numeric_limits<double>::quiet_NaN();
    if (probes.empty()) {
        cert.rho = 0.0;
        cert.r_p = 0.0;
        return cert;
    }

    // rho depends on the kept set and the kept set depends on r_p(rho): seed
    // rho from every probe, restrict to the induced ball, recompute, and keep
    // only samples consistent with the final pair.
    double rho = probes.front().min_weight;
    for (const Probe& pr : probes) rho = std::min(rho, pr.min_weight);
    double r_p = convexity_radius(p, rho, 1.0, a0).r_p;
    double rho_kept = 0.0;
    bool any_kept = false;
    for (const Probe& pr : probes)
        if (pr.ball_norm <= r_p) {
            rho_kept = any_kept ? std::min(rho_kept, pr.min_weight) : pr.min_weight;
            any_kept = true;
        }
    if (any_kept) {
        rho = rho_kept;
        r_p = convexity_radius(p, rho, 1.0, a0).r_p;
    }
    cert.rho = rho;
    cert.r_p = r_p;

    for (const Probe& pr : probes) {
        const double lam = min_eig(hessian_tau(model, x, pr.tau, loss));
        const bool kept = pr.ball_norm <= r_p && pr.min_weight >= rho;
        if (kept) {
            ++cert.samples_checked;
            if (std::isnan(cert.min_eig_observed) || lam < cert.min_eig_observed)
                cert.min_eig_observed = lam;
        } else {
            ++cert.samples_outside;
            if (std::isnan(cert.min_eig_outside) || lam < cert.min_eig_outside)
                cert.min_eig_outside = lam;
        }
    }
    return cert;
}

FrechetResult frechet_mean(const Matrix& X, const LossSpec& loss,
                           const FitConfig& cfg) {
    cfg.validate();
    if (X.cols() < 1)
        throw std::invalid_argument("frechet_mean: need at least one sample");
    if (!X.allFinite())
        throw std::invalid_argument("frechet_mean: data has non-finite entries");
    const int n = static_cast<int>(X.cols());

    const auto value = [&](const Vector& c) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += loss_value(loss, c - X.col(i));
        return acc;
    };
    const auto gradient = [&](const Vector& c) {
        Vector g = Vector::Zero(X.rows());
        for (int i = 0; i < n; ++i) g += loss_gradient(loss, c - X.col(i));
        return g;
    };

    FrechetResult res;
    res.c = X.rowwise().mean();
    double f_cur = value(res.c);
    double eta = cfg.eta_c;
    for (int t = 0; t < cfg.max_iters; ++t) {
        const Vector g = gradient(res.c);
        res.grad_norm = g.norm();
        if (res.grad_norm < cfg.tol) {
            res.converged = true;
            break;
        }
        const double g_sq = g.squaredNorm();
        bool accepted = false;
        double trial = eta;
        for (int b = 0; b <= cfg.max_backtracks; ++b) {
            const Vector c_try = res.c - trial * g;
            const double f_try = value(c_try);
            if (armijo_accept(f_cur, f_try, trial, g_sq, cfg.armijo_alpha)) {
                res.c = c_try;
                f_cur = f_try;
                eta = std::min(trial * cfg.growth, cfg.eta_c * 100.0);
                accepted = true;
                break;
            }
            trial *= cfg.shrink;
        }
        res.iterations = t + 1;
        if (!accepted) break;  // stalled at a nonsmooth point
    }
    if (!res.converged) {
        res.grad_norm = gradient(res.c).norm();
        res.converged = res.grad_norm < cfg.tol;
    }
    return res;
}

namespace {

Vector solve_sensitivity(const Matrix& H, const Vector& rhs, const char* who) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const Vector ev = es.eigenvalues();
    const double lam_min = ev.minCoeff();
    const double lam_max = ev.cwiseAbs().maxCoeff();
    if (!(lam_min > 0.0) || lam_max / lam_min >= 1e12)
        throw NumericalError(std::string(who) + ": singular normal matrix H");
    return es.eigenvectors() * (es.eigenvectors().transpose() * rhs).cwiseQuotient(ev);
}

}  // namespace

Vector sensitivity(const Matrix& X, const LossSpec& loss, const Matrix& deltas,
                   const FitConfig& cfg) {
    if (deltas.rows() != X.rows() || deltas.cols() != X.cols())
        throw std::invalid_argument("sensitivity: perturbation shape mismatch");
    const Vector c_star = frechet_mean(X, loss, cfg).c;
    const int D = static_cast<int>(X.rows());
    Matrix H = Matrix::Zero(D, D);
    Vector rhs = Vector::Zero(D);
    for (int i = 0; i < X.cols(); ++i) {
        const Vector r = X.col(i) - c_star;
        const Matrix W = loss_hessian(loss, r);
        H += W;
        rhs.noalias() += W * deltas.col(i);
    }
    return solve_sensitivity(H, rhs, "sensitivity");
}

Vector l2_sensitivity_decomposition(const Matrix& X, const Matrix& deltas,
                                    const FitConfig& cfg) {
    if (deltas.rows() != X.rows() || deltas.cols() != X.cols())
        throw std::invalid_argument(
            "l2_sensitivity_decomposition: perturbation shape mismatch");
    const Vector c_star = frechet_mean(X, LossSpec::l2(), cfg).c;
    const int D = static_cast<int>(X.rows());
    Matrix H = Matrix::Zero(D, D);
    Vector rhs = Vector::Zero(D);
    for (int i = 0; i < X.cols(); ++i) {
        const Vector r = X.col(i) - c_star;
        const double nr = r.norm();
        if (nr < 0.1)
            throw std::invalid_argument(
                "l2_sensitivity_decomposition: residual too small for the projector form");
        const Matrix P = Matrix::Identity(D, D) - (r * r.transpose()) / (nr * nr);
        H += P / nr;
        rhs.noalias() += (P * deltas.col(i)) / nr;
    }
    return solve_sensitivity(H, rhs, "l2_sensitivity_decomposition");
}

}  // namespace scqm
