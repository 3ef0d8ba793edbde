#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "oracles.hpp"
#include "scqm/loss.hpp"

using namespace scqm;
using oracles::rel_err;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Matrix spd_matrix(Rng& rng, int D) {
    const Matrix A = oracles::random_matrix(rng, D, D);
    return A.transpose() * A + Matrix::Identity(D, D);
}

// The smooth instances used by the finite-difference checks: coordinates kept
// away from lpp kinks and norms away from the huber transition.
std::vector<LossSpec> smooth_losses(int D, Rng& rng) {
    return {LossSpec::l2_squared(), LossSpec::lpp(1.5), LossSpec::lpp(1.8),
            LossSpec::huber(1.0), LossSpec::l2(), LossSpec::mahalanobis(spd_matrix(rng, D))};
}

}  // namespace

TEST_CASE("loss values match the closed forms") {
    CHECK(loss_value(LossSpec::l2_squared(), vec2(3, 4)) == doctest::Approx(25.0));
    CHECK(loss_value(LossSpec::l2(), vec2(3, 4)) == doctest::Approx(5.0));
    CHECK(loss_value(LossSpec::lpp(1.5), vec2(1, -4)) == doctest::Approx(9.0));
    Vector r = vec2(2.0, 0.0);
    CHECK(loss_value(LossSpec::huber(1.0), r) == doctest::Approx(1.5));
    r = vec2(0.3, -0.4);  // inner huber branch
    CHECK(loss_value(LossSpec::huber(1.0), r) == doctest::Approx(0.5 * 0.25));
    CHECK(loss_value(LossSpec::l1(), vec2(1.5, -2.5)) == doctest::Approx(4.0));
    Rng rng(11);
    const Matrix M = spd_matrix(rng, 2);
    const Vector rr = vec2(0.5, -1.0);
    CHECK(loss_value(LossSpec::mahalanobis(M), rr) ==
          doctest::Approx(rr.dot(M * rr)));
}

TEST_CASE("loss gradients match the closed forms") {
    CHECK(rel_err(loss_gradient(LossSpec::l2(), vec2(3, 4)), vec2(0.6, 0.8)) < 1e-14);
    CHECK(rel_err(loss_gradient(LossSpec::lpp(1.5), vec2(1, -4)), vec2(1.5, -3.0)) < 1e-14);
    CHECK(rel_err(loss_gradient(LossSpec::l2_squared(), vec2(1, 2)), vec2(2, 4)) < 1e-14);
    CHECK(rel_err(loss_gradient(LossSpec::l1(), vec2(0, -5)), vec2(0, -1)) < 1e-14);
}

TEST_CASE("loss hessians match the closed forms") {
    Matrix H = loss_hessian(LossSpec::lpp(1.5), vec2(1, 4));
    CHECK(H(0, 0) == doctest::Approx(0.75));
    CHECK(H(1, 1) == doctest::Approx(0.375));
    CHECK(H(0, 1) == 0.0);

    H = loss_hessian(LossSpec::l2(), vec2(1, 0));
    CHECK(std::abs(H(0, 0)) < 1e-14);
    CHECK(std::abs(H(0, 1)) < 1e-14);
    CHECK(H(1, 1) == doctest::Approx(1.0));

    Rng rng(3);
    const Matrix M = spd_matrix(rng, 3);
    const Matrix HM = loss_hessian(LossSpec::mahalanobis(M), oracles::random_vector(rng, 3));
    CHECK((HM - 2.0 * M).norm() < 1e-12);
}

TEST_CASE("nonnegative with value zero at the origin") {
    Rng rng(7);
    for (int D : {2, 5}) {
        const Vector zero = Vector::Zero(D);
        for (const LossSpec& loss : smooth_losses(D, rng)) {
            CHECK(loss_value(loss, zero) == 0.0);
            for (int k = 0; k < 20; ++k)
                CHECK(loss_value(loss, oracles::random_vector(rng, D)) >= 0.0);
        }
        CHECK(loss_value(LossSpec::l1(), zero) == 0.0);
    }
}

TEST_CASE("gradient consistency against central differences") {
    Rng rng(19);
    for (int D : {2, 5, 10}) {
        auto losses = smooth_losses(D, rng);
        for (const LossSpec& loss : losses) {
            for (int k = 0; k < 100; ++k) {
                const Vector r = oracles::smooth_residual(
                    rng, D, loss.kind() == LossKind::Huber ? loss.delta() : -1.0);
                const auto f = [&](const Vector& v) { return loss_value(loss, v); };
                CHECK(rel_err(oracles::fd_gradient(f, r), loss_gradient(loss, r)) < 1e-5);
            }
        }
    }
}

TEST_CASE("hessian consistency against central differences") {
    Rng rng(23);
    for (int D : {2, 5, 10}) {
        auto losses = smooth_losses(D, rng);
        for (const LossSpec& loss : losses) {
            for (int k = 0; k < 30; ++k) {
                const Vector r = oracles::smooth_residual(
                    rng, D, loss.kind() == LossKind::Huber ? loss.delta() : -1.0);
                const Matrix H = loss_hessian(loss, r);
                Matrix H_fd(D, D);
                for (int j = 0; j < D; ++j) {
                    const auto gj = [&](const Vector& v) {
                        return loss_gradient(loss, v)[j];
                    };
                    H_fd.row(j) = oracles::fd_gradient(gj, r).transpose();
                }
                CHECK(rel_err(H_fd, H) < 1e-4);
            }
        }
    }
}

TEST_CASE("midpoint convexity along random segments") {
    Rng rng(31);
    for (int D : {2, 5}) {
        auto losses = smooth_losses(D, rng);
        losses.push_back(LossSpec::l1());
        for (const LossSpec& loss : losses) {
            for (int k = 0; k < 50; ++k) {
                const Vector r1 = oracles::random_vector(rng, D, 2.0);
                const Vector r2 = oracles::random_vector(rng, D, 2.0);
                const double mid = loss_value(loss, (r1 + r2) / 2.0);
                const double avg = (loss_value(loss, r1) + loss_value(loss, r2)) / 2.0;
                CHECK(mid <= avg + 1e-12);
            }
        }
    }
}

TEST_CASE("hessians are positive semidefinite away from kinks") {
    Rng rng(37);
    for (int D : {2, 5}) {
        auto losses = smooth_losses(D, rng);
        losses.push_back(LossSpec::l1());
        for (const LossSpec& loss : losses) {
            for (int k = 0; k < 25; ++k) {
                const Vector r = oracles::smooth_residual(
                    rng, D, loss.kind() == LossKind::Huber ? loss.delta() : -1.0);
                Eigen::SelfAdjointEigenSolver<Matrix> es(loss_hessian(loss, r));
                CHECK(es.eigenvalues().minCoeff() >= -1e-10);
            }
        }
    }
}

TEST_CASE("l2 hessian annihilates its residual") {
    Rng rng(41);
    for (int k = 0; k < 50; ++k) {
        Vector r = oracles::random_vector(rng, 4);
        if (r.norm() < 0.1) r *= 0.2 / r.norm();
        const Matrix H = loss_hessian(LossSpec::l2(), r);
        CHECK((H * r).norm() <= 1e-10 * r.norm());
    }
}

TEST_CASE("subgradient selections at nonsmooth points") {
    const Vector zero = Vector::Zero(3);
    CHECK(loss_gradient(LossSpec::l1(), zero).norm() == 0.0);
    CHECK(loss_gradient(LossSpec::l2(), zero).norm() == 0.0);
    // bounded surrogate curvature at the l2 kink
    const Matrix H = loss_hessian(LossSpec::l2(), zero);
    CHECK(H(0, 0) == doctest::Approx(1e12));
    CHECK(std::abs(H(0, 1)) < 1e-14);
    // lpp curvature flooring at a zero coordinate
    const Matrix Hp = loss_hessian(LossSpec::lpp(1.5), vec2(0.0, 1.0));
    CHECK(std::isfinite(Hp(0, 0)));
    CHECK(Hp(0, 0) == doctest::Approx(1.5 * 0.5 * std::pow(1e-12, -0.5)));
}

TEST_CASE("construction rejects invalid parameters") {
    CHECK_THROWS_AS(LossSpec::lpp(0.5), std::invalid_argument);
    CHECK_THROWS_AS(LossSpec::huber(0.0), std::invalid_argument);
    CHECK_THROWS_AS(LossSpec::huber(-1.0), std::invalid_argument);
    Matrix M(2, 2);
    M << 1.0, 2.0, 2.0, 1.0;  // indefinite
    CHECK_THROWS_AS(LossSpec::mahalanobis(M), std::invalid_argument);
    Matrix Ns(2, 2);
    Ns << 1.0, 0.5, 0.0, 1.0;  // asymmetric
    CHECK_THROWS_AS(LossSpec::mahalanobis(Ns), std::invalid_argument);
}

TEST_CASE("loss spec string round trip") {
    for (const std::string& text :
         {std::string("l1"), std::string("l2"), std::string("l2sq"),
          std::string("lpp:p=1.5"), std::string("huber:delta=0.5")}) {
        const LossSpec loss = LossSpec::parse(text);
        CHECK(LossSpec::parse(loss.to_string()).to_string() == loss.to_string());
    }
    CHECK(LossSpec::parse("lpp:p=1.5").p() == doctest::Approx(1.5));
    CHECK(LossSpec::parse("huber:delta=0.5").delta() == doctest::Approx(0.5));
    CHECK_THROWS_AS(LossSpec::parse("frobnitz"), std::invalid_argument);
    CHECK_THROWS_AS(LossSpec::parse("lpp"), std::invalid_argument);
    CHECK_THROWS_AS(LossSpec::parse("lpp:p=0.2"), std::invalid_argument);
    CHECK_THROWS_AS(LossSpec::parse("mahalanobis"), std::invalid_argument);
}

TEST_CASE("dimension and finiteness preconditions") {
    Rng rng(43);
    const Matrix M = spd_matrix(rng, 3);
    const LossSpec loss = LossSpec::mahalanobis(M);
    CHECK_THROWS_AS(loss_value(loss, vec2(1, 2)), std::invalid_argument);
    Vector bad = vec2(1, 2);
    bad[0] = std::nan("");
    CHECK_THROWS_AS(loss_value(LossSpec::l2(), bad), std::invalid_argument);
}
