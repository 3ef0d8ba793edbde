#pragma once

// Independent numerical oracles for the test suite: finite differences, brute
// force searches, classical iterations and distribution fixtures. Everything
// here is deliberately written from first principles rather than reusing the
// library's analytic code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "scqm/datagen.hpp"
#include "scqm/quadmap.hpp"
#include "scqm/stiefel.hpp"
#include "scqm/types.hpp"

namespace oracles {

using scqm::Matrix;
using scqm::Vector;

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

inline double rel_err(const Vector& a, const Vector& b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

inline double rel_err(const Matrix& a, const Matrix& b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double h = 1e-5) {
    Vector g(x.size());
    for (int j = 0; j < x.size(); ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        g[j] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

inline Matrix fd_gradient_mat(const std::function<double(const Matrix&)>& f,
                              const Matrix& x, double h = 1e-5) {
    Matrix g(x.rows(), x.cols());
    for (int j = 0; j < x.cols(); ++j)
        for (int i = 0; i < x.rows(); ++i) {
            Matrix xp = x, xm = x;
            xp(i, j) += h;
            xm(i, j) -= h;
            g(i, j) = (f(xp) - f(xm)) / (2.0 * h);
        }
    return g;
}

// Jacobian of a vector-valued map by central differences; column j is df/dx_j.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                          const Vector& x, double h = 1e-5) {
    const Vector f0 = f(x);
    Matrix J(f0.size(), x.size());
    for (int j = 0; j < x.size(); ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return J;
}

inline double grid_search_1d(const std::function<double(double)>& f, double lo,
                             double hi, double step) {
    double best_x = lo, best_f = f(lo);
    for (double x = lo + step; x <= hi; x += step) {
        const double v = f(x);
        if (v < best_f) {
            best_f = v;
            best_x = x;
        }
    }
    return best_x;
}

// Geometric median by Weiszfeld iteration from the mean.
inline Vector weiszfeld(const Matrix& X, int iters = 2000) {
    Vector y = X.rowwise().mean();
    for (int t = 0; t < iters; ++t) {
        Vector num = Vector::Zero(X.rows());
        double den = 0.0;
        for (int i = 0; i < X.cols(); ++i) {
            const double dist = (X.col(i) - y).norm();
            if (dist < 1e-14) return X.col(i);
            num += X.col(i) / dist;
            den += 1.0 / dist;
        }
        const Vector y_new = num / den;
        if ((y_new - y).norm() < 1e-14) return y_new;
        y = y_new;
    }
    return y;
}

// Regularized lower incomplete gamma P(a, x), series and continued fraction.
inline double reg_gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) return std::nan("");
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Lentz continued fraction for Q(a, x).
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    const double q = std::exp(-x + a * std::log(x) - gln) * h;
    return 1.0 - q;
}

// CDF of the density proportional to exp(-|t|^p).
inline double gg_cdf(double t, double p) {
    const double half = 0.5 * reg_gamma_p(1.0 / p, std::pow(std::abs(t), p));
    return t >= 0.0 ? 0.5 + half : 0.5 - half;
}

// CDF of Gamma(shape, 1).
inline double gamma_cdf(double t, double shape) {
    return t <= 0.0 ? 0.0 : reg_gamma_p(shape, t);
}

inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - F));
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    }
    return d;
}

inline Vector random_vector(scqm::Rng& rng, int n, double scale = 1.0) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
}

inline Matrix random_matrix(scqm::Rng& rng, int rows, int cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
    return m;
}

inline Matrix random_orthogonal(scqm::Rng& rng, int n) {
    return scqm::retract_qr(random_matrix(rng, n, n));
}

inline scqm::QuadraticModel random_model(scqm::Rng& rng, int D, int d, int s,
                                         double theta_scale = 0.3) {
    scqm::QuadraticModel model;
    model.d = d;
    model.s = s;
    model.c = random_vector(rng, D);
    model.Q = scqm::retract_qr(random_matrix(rng, D, d + s));
    model.Theta = random_matrix(rng, scqm::vech_size(d), s, theta_scale);
    return model;
}

// Residual vector with every coordinate bounded away from zero (lpp kinks)
// and, for huber, a norm bounded away from the delta transition.
inline Vector smooth_residual(scqm::Rng& rng, int D, double huber_delta = -1.0) {
    Vector r(D);
    for (int i = 0; i < D; ++i) {
        const double mag = 0.2 + rng.uniform();
        r[i] = rng.rademacher() * mag;
    }
    if (huber_delta > 0.0) {
        const double nr = r.norm();
        if (std::abs(nr - huber_delta) < 0.1) r *= (nr + 0.25) / nr;
    }
    return r;
}

}  // namespace oracles
