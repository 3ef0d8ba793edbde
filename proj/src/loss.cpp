#include "scqm/loss.hpp"

#include <cmath>
#include <sstream>

namespace scqm {

namespace {

void check_residual(const LossSpec& loss, const Vector& r) {
    if (!r.allFinite())
        throw std::invalid_argument("loss: residual has non-finite entries");
    if (loss.kind() == LossKind::Mahalanobis && loss.metric().rows() != r.size())
        throw std::invalid_argument("loss: residual dimension does not match Mahalanobis metric");
}

// Hessian of ||r||_2 away from zero: (1/||r||) (I - r r^T / ||r||^2).
Matrix euclidean_norm_hessian(const Vector& r, double eps_guard) {
    const double nrm = r.norm();
    const auto n = r.size();
    if (nrm < eps_guard)
        return Matrix::Identity(n, n) / eps_guard;  // bounded surrogate at the kink
    Matrix H = Matrix::Identity(n, n) - (r * r.transpose()) / (nrm * nrm);
    return H / nrm;
}

}  // namespace

LossSpec LossSpec::l1() { return LossSpec(LossKind::L1); }

LossSpec LossSpec::l2(double eps_guard) {
    LossSpec loss(LossKind::L2);
    if (eps_guard <= 0) throw std::invalid_argument("l2: eps_guard must be positive");
    loss.eps_guard_ = eps_guard;
    return loss;
}

LossSpec LossSpec::l2_squared() { return LossSpec(LossKind::L2Squared); }

LossSpec LossSpec::lpp(double p, double eps_guard) {
    if (!(p >= 1.0)) throw std::invalid_argument("lpp: requires p >= 1");
    if (eps_guard <= 0) throw std::invalid_argument("lpp: eps_guard must be positive");
    LossSpec loss(LossKind::LpP);
    loss.p_ = p;
    loss.eps_guard_ = eps_guard;
    return loss;
}

LossSpec LossSpec::mahalanobis(const Matrix& M) {
    if (M.rows() != M.cols())
        throw std::invalid_argument("mahalanobis: M must be square");
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + M.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("mahalanobis: M must be symmetric");
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("mahalanobis: M must be positive definite");
    LossSpec loss(LossKind::Mahalanobis);
    loss.M_ = 0.5 * (M + M.transpose());
    return loss;
}

LossSpec LossSpec::huber(double delta) {
    if (!(delta > 0)) throw std::invalid_argument("huber: requires delta > 0");
    LossSpec loss(LossKind::Huber);
    loss.delta_ = delta;
    return loss;
}

std::string LossSpec::to_string() const {
    std::ostringstream out;
    switch (kind_) {
        case LossKind::L1: return "l1";
        case LossKind::L2: return "l2";
        case LossKind::L2Squared: return "l2sq";
        case LossKind::LpP:
            out << "lpp:p=" << p_;
            return out.str();
        case LossKind::Mahalanobis: return "mahalanobis";
        case LossKind::Huber:
            out << "huber:delta=" << delta_;
            return out.str();
    }
    return "?";
}

LossSpec LossSpec::parse(const std::string& text) {
    if (text == "l1") return l1();
    if (text == "l2") return l2();
    if (text == "l2sq") return l2_squared();
    const auto parse_param = [&](const std::string& prefix) {
        const std::string body = text.substr(prefix.size());
        std::size_t pos = 0;
        double value = std::stod(body, &pos);
        if (pos != body.size())
            throw std::invalid_argument("loss: trailing characters in '" + text + "'");
        return value;
    };
    if (text.rfind("lpp:p=", 0) == 0) return lpp(parse_param("lpp:p="));
    if (text.rfind("huber:delta=", 0) == 0) return huber(parse_param("huber:delta="));
    if (text == "mahalanobis")
        throw std::invalid_argument("loss: mahalanobis needs a metric matrix and cannot be selected by string");
    throw std::invalid_argument("loss: unknown loss '" + text +
                                "' (expected l1, l2, l2sq, lpp:p=<v> or huber:delta=<v>)");
}

double loss_value(const LossSpec& loss, const Vector& r) {
    check_residual(loss, r);
    switch (loss.kind()) {
        case LossKind::L1: return r.cwiseAbs().sum();
        case LossKind::L2: return r.norm();
        case LossKind::L2Squared: return r.squaredNorm();
        case LossKind::LpP: {
            const double p = loss.p();
            double sum = 0;
            for (Eigen::Index k = 0; k < r.size(); ++k) sum += std::pow(std::abs(r[k]), p);
            return sum;
        }
        case LossKind::Mahalanobis: return r.dot(loss.metric() * r);
        case LossKind::Huber: {
            const double nrm = r.norm();
            const double d = loss.delta();
            return nrm <= d ? 0.5 * nrm * nrm : d * nrm - 0.5 * d * d;
        }
    }
    throw std::logic_error("loss_value: unreachable");
}

Vector loss_gradient(const LossSpec& loss, const Vector& r) {
    check_residual(loss, r);
    switch (loss.kind()) {
        case LossKind::L1:
            return r.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
        case LossKind::L2: {
            const double nrm = r.norm();
            if (nrm == 0) return Vector::Zero(r.size());  // minimum-norm subgradient
            return r / nrm;
        }
        case LossKind::L2Squared: return 2.0 * r;
        case LossKind::LpP: {
            const double p = loss.p();
            return r.unaryExpr([p](double v) {
                if (v == 0) return 0.0;
                return p * std::pow(std::abs(v), p - 1.0) * (v > 0 ? 1.0 : -1.0);
            });
        }
        case LossKind::Mahalanobis: return 2.0 * (loss.metric() * r);
        case LossKind::Huber: {
            const double nrm = r.norm();
            const double d = loss.delta();
            if (nrm <= d) return r;
            return (d / nrm) * r;
        }
    }
    throw std::logic_error("loss_gradient: unreachable");
}

Matrix loss_hessian(const LossSpec& loss, const Vector& r) {
    check_residual(loss, r);
    const auto n = r.size();
    switch (loss.kind()) {
        case LossKind::L1:
            return Matrix::Zero(n, n);  // zero a.e.
        case LossKind::L2:
            return euclidean_norm_hessian(r, loss.eps_guard());
        case LossKind::L2Squared:
            return 2.0 * Matrix::Identity(n, n);
        case LossKind::LpP: {
            const double p = loss.p();
            const double eps = loss.eps_guard();
            Vector diag(n);
            for (Eigen::Index k = 0; k < n; ++k) {
                double a = std::abs(r[k]);
                if (p < 2.0 && a < eps) a = eps;
                diag[k] = p * (p - 1.0) * std::pow(a, p - 2.0);
            }
            return diag.asDiagonal();
        }
        case LossKind::Mahalanobis:
            return 2.0 * loss.metric();
        case LossKind::Huber: {
            const double nrm = r.norm();
            const double d = loss.delta();
            if (nrm <= d) return Matrix::Identity(n, n);
            return d * euclidean_norm_hessian(r, loss.eps_guard());
        }
    }
    throw std::logic_error("loss_hessian: unreachable");
}

}  // namespace scqm
