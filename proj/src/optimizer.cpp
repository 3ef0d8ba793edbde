#include "scqm/optimizer.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scqm/stiefel.hpp"

namespace scqm {

void FitConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("FitConfig: tol must be positive");
    if (!(eta_q > 0.0 && eta_theta > 0.0 && eta_c > 0.0 && eta_tau > 0.0))
        throw std::invalid_argument("FitConfig: step sizes must be positive");
    if (!(armijo_alpha > 0.0 && armijo_alpha < 1.0))
        throw std::invalid_argument("FitConfig: armijo_alpha must be in (0,1)");
    if (!(shrink > 0.0 && shrink < 1.0))
        throw std::invalid_argument("FitConfig: shrink must be in (0,1)");
    if (!(growth >= 1.0)) throw std::invalid_argument("FitConfig: growth must be >= 1");
    if (max_backtracks < 0)
        throw std::invalid_argument("FitConfig: max_backtracks must be >= 0");
    if (!(theta_init_sigma >= 0.0))
        throw std::invalid_argument("FitConfig: theta_init_sigma must be >= 0");
}

namespace {

void check_state(const QuadraticModel& model, const LatentCoords& taus, const Matrix& X) {
    const int n = static_cast<int>(X.cols());
    if (static_cast<int>(X.rows()) != model.ambient_dim())
        throw std::invalid_argument("optimizer: ambient dimension mismatch");
    if (static_cast<int>(taus.rows()) != model.d || static_cast<int>(taus.cols()) != n)
        throw std::invalid_argument("optimizer: latent coordinate shape mismatch");
}

}  // namespace

double objective(const QuadraticModel& model, const LatentCoords& taus,
                 const Matrix& X, const LossSpec& loss) {
    check_state(model, taus, X);
    double total = 0.0;
    for (int i = 0; i < X.cols(); ++i)
        total += loss_value(loss, evaluate(model, taus.col(i)) - X.col(i));
    return total;
}

Vector grad_c(const QuadraticModel& model, const LatentCoords& taus,
              const Matrix& X, const LossSpec& loss) {
    check_state(model, taus, X);
    Vector g = Vector::Zero(model.ambient_dim());
    for (int i = 0; i < X.cols(); ++i)
        g += loss_gradient(loss, evaluate(model, taus.col(i)) - X.col(i));
    return g;
}

Matrix grad_theta(const QuadraticModel& model, const LatentCoords& taus,
                  const Matrix& X, const LossSpec& loss) {
    check_state(model, taus, X);
    const int m = vech_size(model.d);
    Matrix g = Matrix::Zero(m, model.s);
    if (model.s == 0) return g;
    const Matrix V = model.V();
    for (int i = 0; i < X.cols(); ++i) {
        const Vector tau = taus.col(i);
        const Vector gi = loss_gradient(loss, evaluate(model, tau) - X.col(i));
        const Vector phi = vech(Matrix(tau * tau.transpose()));
        g.noalias() += phi * (V.transpose() * gi).transpose();
    }
    return g;
}

Matrix grad_q(const QuadraticModel& model, const LatentCoords& taus,
              const Matrix& X, const LossSpec& loss) {
    check_state(model, taus, X);
    const int k = model.d + model.s;
    Matrix g = Matrix::Zero(model.ambient_dim(), k);
    for (int i = 0; i < X.cols(); ++i) {
        const Vector tau = taus.col(i);
        const Vector gi = loss_gradient(loss, evaluate(model, tau) - X.col(i));
        Vector h(k);
        h.head(model.d) = tau;
        if (model.s > 0) {
            const Vector phi = vech(Matrix(tau * tau.transpose()));
            h.tail(model.s) = model.Theta.transpose() * phi;
        }
        g.noalias() += gi * h.transpose();
    }
    return g;
}

Vector grad_tau(const QuadraticModel& model, const LatentCoords& taus,
                const Matrix& X, const LossSpec& loss, int i) {
    check_state(model, taus, X);
    if (i < 0 || i >= X.cols())
        throw std::invalid_argument("grad_tau: sample index out of range");
    const Vector tau = taus.col(i);
    const Vector gi = loss_gradient(loss, evaluate(model, tau) - X.col(i));
    return jacobian_tau(model, tau).transpose() * gi;
}

bool armijo_accept(double f_old, double f_new, double eta, double grad_sq_norm,
                   double alpha) {
    return f_new <= f_old - alpha * eta * grad_sq_norm;
}

KktResiduals kkt_residuals(const QuadraticModel& model, const LatentCoords& taus,
                           const Matrix& X, const LossSpec& loss) {
    KktResiduals res;
    res.res_q = tangent_project(model.Q, grad_q(model, taus, X, loss)).norm();
    res.res_theta = grad_theta(model, taus, X, loss).norm();
    res.res_c = grad_c(model, taus, X, loss).norm();
    res.res_tau_max = 0.0;
    for (int i = 0; i < X.cols(); ++i)
        res.res_tau_max = std::max(res.res_tau_max,
                                   grad_tau(model, taus, X, loss, i).norm());
    return res;
}

namespace {

struct StepState {
    double eta;        // persistent step, regrown on acceptance
    double eta_init;
};

// Backtracks a Euclidean block update. apply(eta) must return the candidate
// objective after stepping by eta; commit(eta) installs the accepted state.
// Returns the accepted eta, or 0 when the block was skipped.
template <typename TryStep, typename Commit>
double backtrack_block(StepState& st, double& f_cur, double grad_sq,
                       const FitConfig& cfg, TryStep&& try_step, Commit&& commit) {
    if (!(grad_sq > 0.0)) return 0.0;
    double eta = st.eta;
    for (int b = 0; b <= cfg.max_backtracks; ++b) {
        bool ok = true;
        double f_try = 0.0;
        try {
            f_try = try_step(eta);
        } catch (const RankDeficiencyError&) {
            ok = false;
        }
        if (ok && armijo_accept(f_cur, f_try, eta, grad_sq, cfg.armijo_alpha)) {
            commit(eta);
            f_cur = f_try;
            st.eta = std::min(eta * cfg.growth, st.eta_init * 100.0);
            return eta;
        }
        eta *= cfg.shrink;
    }
    return 0.0;  // block skipped this iteration; st.eta left unchanged
}

}  // namespace

FitResult fit(const Matrix& X, int d, int s, const LossSpec& loss,
              const FitConfig& cfg, bool freeze_theta) {
    cfg.validate();
    const int D = static_cast<int>(X.rows());
    const int n = static_cast<int>(X.cols());
    const int k = d + s;
    if (d < 1 || s < 0) throw std::invalid_argument("fit: need d >= 1 and s >= 0");
    if (D < k) throw std::invalid_argument("fit: ambient dimension must be >= d+s");
    if (n < 1) throw std::invalid_argument("fit: need at least one sample");
    if (!X.allFinite()) throw std::invalid_argument("fit: data has non-finite entries");

    FitResult out;
    FitTrace& trace = out.trace;
    if (n <= k)
        trace.warnings.push_back("fit: n <= d+s, problem is underdetermined");

    // PCA initialization: c = mean, Q = leading d+s left singular vectors.
    QuadraticModel& model = out.model;
    model.d = d;
    model.s = s;
    model.c = X.rowwise().mean();
    const Matrix centered = X.colwise() - model.c;
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU);
    const int avail = std::min<int>(static_cast<int>(svd.matrixU().cols()), k);
    Matrix Q0(D, k);
    Q0.leftCols(avail) = svd.matrixU().leftCols(avail);
    if (avail < k) {
        // Not enough data directions; pad with random columns and re-orthonormalize.
        Rng pad_rng = Rng::substream(cfg.seed, 0x70ad);
        for (int j = avail; j < k; ++j)
            for (int i = 0; i < D; ++i) Q0(i, j) = pad_rng.normal();
        trace.warnings.push_back("fit: PCA rank below d+s, padded basis randomly");
    }
    model.Q = retract_qr(Q0);

    out.taus = model.U().transpose() * centered;

    const int m = vech_size(d);
    model.Theta = Matrix::Zero(m, s);
    if (s > 0 && !freeze_theta && cfg.theta_init_sigma > 0.0) {
        Rng theta_rng(cfg.seed);
        for (int j = 0; j < s; ++j)
            for (int i = 0; i < m; ++i)
                model.Theta(i, j) = cfg.theta_init_sigma * theta_rng.normal();
    }

    LatentCoords& taus = out.taus;
    double f_cur = objective(model, taus, X, loss);
    if (!std::isfinite(f_cur))
        throw NumericalError("fit: non-finite objective at initialization");
    trace.initial_objective = f_cur;

    StepState step_q{cfg.eta_q, cfg.eta_q};
    StepState step_theta{cfg.eta_theta, cfg.eta_theta};
    StepState step_c{cfg.eta_c, cfg.eta_c};
    std::vector<StepState> step_tau(static_cast<size_t>(n), {cfg.eta_tau, cfg.eta_tau});

    // Loss gradients G refresh before each block so every Armijo test compares
    // the step against the gradient of the state it actually starts from;
    // reusing the iteration-start g_i across blocks turns the later directions
    // into non-descent ones near stationarity and the line searches collapse.
    Matrix G(D, n);
    const auto refresh_G = [&]() {
        for (int i = 0; i < n; ++i)
            G.col(i) = loss_gradient(loss, evaluate(model, taus.col(i)) - X.col(i));
    };

    for (int t = 1; t <= cfg.max_iters; ++t) {
        const double f_iter_start = f_cur;

        Matrix Phi(m, n);     // phi_i = vech(tau_i tau_i'), fixed until the tau block
        for (int i = 0; i < n; ++i) {
            const Vector tau = taus.col(i);
            Phi.col(i) = vech(Matrix(tau * tau.transpose()));
        }
        refresh_G();

        Matrix gq(D, k);
        {
            Matrix H(k, n);  // h_i = [tau_i; Theta' phi_i]
            H.topRows(d) = taus;
            if (s > 0) H.bottomRows(s).noalias() = model.Theta.transpose() * Phi;
            gq.noalias() = G * H.transpose();
        }
        const Matrix xi = tangent_project(model.Q, gq);

        IterationStat stat;
        stat.iteration = t;
        stat.res_q = xi.norm();
        stat.res_theta = (s > 0) ? (Phi * (model.V().transpose() * G).transpose()).norm()
                                 : 0.0;
        stat.res_c = G.rowwise().sum().norm();
        stat.res_tau_max = 0.0;

        // Q block: retract along the negative Riemannian gradient.
        stat.eta_q = backtrack_block(
            step_q, f_cur, xi.squaredNorm(), cfg,
            [&](double eta) {
                QuadraticModel trial = model;
                trial.Q = retract_qr(Matrix(model.Q - eta * xi));
                return objective(trial, taus, X, loss);
            },
            [&](double eta) { model.Q = retract_qr(Matrix(model.Q - eta * xi)); });

        // Theta block.
        if (s > 0 && !freeze_theta) {
            if (stat.eta_q > 0.0) refresh_G();
            const Matrix gtheta = Phi * (model.V().transpose() * G).transpose();
            stat.eta_theta = backtrack_block(
                step_theta, f_cur, gtheta.squaredNorm(), cfg,
                [&](double eta) {
                    QuadraticModel trial = model;
                    trial.Theta = model.Theta - eta * gtheta;
                    return objective(trial, taus, X, loss);
                },
                [&](double eta) { model.Theta -= eta * gtheta; });
            if (stat.eta_theta > 0.0) refresh_G();
        } else if (stat.eta_q > 0.0) {
            refresh_G();
        }

        // c block.
        const Vector gc = G.rowwise().sum();
        stat.eta_c = backtrack_block(
            step_c, f_cur, gc.squaredNorm(), cfg,
            [&](double eta) {
                QuadraticModel trial = model;
                trial.c = model.c - eta * gc;
                return objective(trial, taus, X, loss);
            },
            [&](double eta) { model.c -= eta * gc; });

        // tau block: per-sample gradient J(tau_i)' g_i at the updated model;
        // each sample backtracks independently.
        double f_after_tau = 0.0;
        double eta_tau_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const Vector x_i = X.col(i);
            Vector tau = taus.col(i);
            const Vector g_i = loss_gradient(loss, evaluate(model, tau) - x_i);
            const Vector dir = jacobian_tau(model, tau).transpose() * g_i;
            stat.res_tau_max = std::max(stat.res_tau_max, dir.norm());
            double li = loss_value(loss, evaluate(model, tau) - x_i);
            const double dir_sq = dir.squaredNorm();
            if (dir_sq > 0.0) {
                StepState& st = step_tau[static_cast<size_t>(i)];
                double eta = st.eta;
                for (int b = 0; b <= cfg.max_backtracks; ++b) {
                    const Vector tau_try = tau - eta * dir;
                    const double l_try =
                        loss_value(loss, evaluate(model, tau_try) - x_i);
                    if (armijo_accept(li, l_try, eta, dir_sq, cfg.armijo_alpha)) {
                        tau = tau_try;
                        li = l_try;
                        taus.col(i) = tau;
                        st.eta = std::min(eta * cfg.growth, st.eta_init * 100.0);
                        eta_tau_sum += eta;
                        break;
                    }
                    eta *= cfg.shrink;
                }
            }
            f_after_tau += li;
        }
        f_cur = f_after_tau;
        stat.mean_eta_tau = eta_tau_sum / static_cast<double>(n);

        if (!std::isfinite(f_cur))
            throw NumericalError("fit: non-finite objective (diverged)");

        stat.objective = f_cur;
        stat.orth_defect = stiefel_defect(model.Q);
        trace.iterations.push_back(stat);

        const double decrease = f_iter_start - f_cur;
        if (decrease < cfg.tol * std::max(1.0, std::abs(f_iter_start))) {
            trace.converged = true;
            break;
        }
    }

    trace.final_kkt = kkt_residuals(model, taus, X, loss);
    return out;
}

FitResult fit(const Dataset& data, int d, int s, const LossSpec& loss,
              const FitConfig& cfg, bool freeze_theta) {
    return fit(data.X, d, s, loss, cfg, freeze_theta);
}

}  // namespace scqm
