#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "oracles.hpp"
#include "scqm/pipeline.hpp"

using namespace scqm;

TEST_CASE("knn basics and the exhaustive-sort oracle") {
    Matrix line(1, 4);
    line << 0.0, 1.0, 2.0, 3.0;
    CHECK(knn(line, 2, 1) == std::vector<int>{2});
    CHECK(knn(line, 0, 2) == std::vector<int>{0, 1});
    CHECK(knn(line, 0, 4) == std::vector<int>{0, 1, 2, 3});

    Rng rng(1);
    const Matrix X = oracles::random_matrix(rng, 3, 40);
    for (int i : {0, 7, 39}) {
        const std::vector<int> got = knn(X, i, 7);
        std::vector<std::pair<double, int>> order;
        for (int j = 0; j < 40; ++j)
            order.emplace_back((X.col(j) - X.col(i)).squaredNorm(), j);
        std::sort(order.begin(), order.end());
        for (int k = 0; k < 7; ++k) CHECK(got[static_cast<size_t>(k)] == order[static_cast<size_t>(k)].second);
    }

    CHECK_THROWS_AS(knn(line, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(knn(line, 4, 2), std::invalid_argument);

    // tie broken by smaller index: duplicate of column 0 at column 3
    Matrix ties(1, 4);
    ties << 0.0, 5.0, 9.0, 0.0;
    CHECK(knn(ties, 3, 2) == std::vector<int>{0, 3});
}

TEST_CASE("mse arithmetic and permutation invariance") {
    Matrix A = Matrix::Zero(3, 10);
    Matrix B = A;
    CHECK(mse(A, B) == 0.0);
    B(0, 4) += 1.0;
    CHECK(mse(A, B) == doctest::Approx(0.1));

    Rng rng(2);
    const Matrix X = oracles::random_matrix(rng, 3, 11);
    const Matrix Y = oracles::random_matrix(rng, 3, 11);
    double naive = 0.0;
    for (int i = 0; i < 11; ++i) naive += (X.col(i) - Y.col(i)).squaredNorm();
    naive /= 11.0;
    CHECK(std::abs(mse(X, Y) - naive) < 1e-14);

    Matrix Xp(3, 11), Yp(3, 11);
    for (int i = 0; i < 11; ++i) {
        Xp.col(i) = X.col((i + 5) % 11);
        Yp.col(i) = Y.col((i + 5) % 11);
    }
    CHECK(mse(Xp, Yp) == doctest::Approx(mse(X, Y)).epsilon(1e-14));

    CHECK_THROWS_AS(mse(A, Matrix::Zero(3, 9)), std::invalid_argument);
}

TEST_CASE("denoise nearly self-reproduces a clean sphere") {
    const Dataset ds = sphere_dataset(100, 0.0, 3);
    DenoiseConfig cfg;
    cfg.K = 30;
    cfg.d = 2;
    cfg.s = 1;
    cfg.loss = LossSpec::l2_squared();
    cfg.fit = default_bench_fit_config();
    cfg.fit.seed = 3;
    const DenoiseResult res = denoise(ds, cfg);
    CHECK(res.diag.failed_points.empty());
    CHECK(mse(res.X_hat, *ds.X_clean) < 1e-3);
}

TEST_CASE("linear ablation recovers projection onto an affine plane") {
    Rng rng(4);
    const Matrix U0 = retract_qr(oracles::random_matrix(rng, 3, 2));
    Vector c0(3);
    c0 << 0.3, -0.1, 0.5;
    const int n = 80;
    Matrix X(3, n);
    Matrix X_proj_true(3, n);
    Rng noise(5);
    for (int i = 0; i < n; ++i) {
        const Vector on_plane = c0 + U0 * oracles::random_vector(rng, 2);
        X.col(i) = on_plane + oracles::random_vector(noise, 3, 0.002);
        // closed-form orthogonal projection of the noisy point onto the plane
        X_proj_true.col(i) = c0 + U0 * (U0.transpose() * (X.col(i) - c0));
    }
    DenoiseConfig cfg;
    cfg.K = 40;
    cfg.d = 2;
    cfg.s = 1;
    cfg.loss = LossSpec::l2_squared();
    cfg.linear_ablation = true;
    cfg.fit = default_bench_fit_config();
    cfg.fit.seed = 4;
    const DenoiseResult res = denoise(X, cfg);
    CHECK(res.diag.failed_points.empty());
    double mean_diff = 0.0;
    for (int i = 0; i < n; ++i) mean_diff += (res.X_hat.col(i) - X_proj_true.col(i)).norm();
    mean_diff /= n;
    CHECK(mean_diff < 1e-3);
}

TEST_CASE("a full-data neighborhood collapses to one shared fit") {
    const Dataset ds = circle_dataset(12, NoiseSpec::gaussian(0.02), 6);
    DenoiseConfig cfg;
    cfg.K = 12;
    cfg.d = 1;
    cfg.s = 1;
    cfg.fit.max_iters = 100;
    cfg.fit.seed = 6;
    const DenoiseResult res = denoise(ds, cfg);
    REQUIRE(res.diag.failed_points.empty());
    for (size_t i = 1; i < res.diag.fit_objectives.size(); ++i)
        CHECK(res.diag.fit_objectives[i] == res.diag.fit_objectives[0]);
}

TEST_CASE("denoise output is independent of the thread count") {
    const Dataset ds = sphere_dataset(48, 0.05, 7);
    DenoiseConfig cfg;
    cfg.K = 16;
    cfg.d = 2;
    cfg.s = 1;
    cfg.fit = default_bench_fit_config();
    cfg.fit.max_iters = 80;
    cfg.fit.seed = 7;
    const DenoiseResult one = denoise(ds, cfg, 1);
    const DenoiseResult four = denoise(ds, cfg, 4);
    CHECK((one.X_hat - four.X_hat).norm() == 0.0);
    CHECK(one.diag.failed_points == four.diag.failed_points);
}

TEST_CASE("denoise leaves exactly representable data in place") {
    // points on an affine 2-plane are exactly representable by the local
    // models, so a zero-noise input must not move beyond the fit tolerance
    Rng rng(8);
    const Matrix U0 = retract_qr(oracles::random_matrix(rng, 3, 2));
    Vector c0(3);
    c0 << -0.2, 0.4, 0.1;
    const int n = 40;
    Matrix X(3, n);
    for (int i = 0; i < n; ++i) X.col(i) = c0 + U0 * oracles::random_vector(rng, 2);
    DenoiseConfig cfg;
    cfg.K = 20;
    cfg.d = 2;
    cfg.s = 1;
    cfg.linear_ablation = true;
    cfg.fit.max_iters = 3000;
    cfg.fit.tol = 1e-9;
    cfg.fit.seed = 8;
    const DenoiseResult res = denoise(X, cfg);
    REQUIRE(res.diag.failed_points.empty());
    for (int i = 0; i < n; ++i)
        CHECK((res.X_hat.col(i) - X.col(i)).squaredNorm() <= 10.0 * cfg.fit.tol);
}

TEST_CASE("denoise validates its configuration") {
    const Dataset ds = circle_dataset(10, NoiseSpec::none(), 1);
    DenoiseConfig cfg;
    cfg.K = 12;  // K > n
    cfg.d = 1;
    cfg.s = 1;
    CHECK_THROWS_AS(denoise(ds, cfg), std::invalid_argument);
    cfg.K = 2;  // K < d+s+1
    CHECK_THROWS_AS(denoise(ds, cfg), std::invalid_argument);
    cfg.K = 8;
    CHECK_THROWS_AS(denoise(ds, cfg, 0), std::invalid_argument);

    DenoiseConfig warn;
    warn.K = 4;  // below 2(d+s)
    warn.d = 2;
    warn.s = 1;
    CHECK_FALSE(warn.validate(10).empty());
}

TEST_CASE("benchmark_sphere pools per-point errors per cell") {
    const std::vector<double> sigmas = {0.05};
    const std::vector<LossSpec> losses = {LossSpec::l2_squared()};
    const std::vector<std::string> variants = {"quadratic", "linear"};
    const std::vector<std::uint64_t> seeds = {1, 2};
    FitConfig fc = default_bench_fit_config();
    fc.max_iters = 80;
    const BenchReport report = benchmark_sphere(sigmas, losses, variants, seeds,
                                                60, 20, 2, 1, fc);
    REQUIRE(report.cells.size() == 2);
    for (const std::string& variant : variants) {
        const BenchCell& cell = report.cell(0.05, "l2sq", variant);
        CHECK(cell.points() == 120);
        REQUIRE(cell.errors_by_seed.size() == 2);
        double acc = 0.0;
        for (const auto& block : cell.errors_by_seed)
            for (double e : block) acc += e;
        CHECK(cell.mse == doctest::Approx(acc / 120.0).epsilon(1e-14));
        CHECK(cell.mse > 0.0);
    }
    CHECK_THROWS_AS(report.cell(0.05, "l2sq", "cubic"), std::invalid_argument);
    CHECK_THROWS_AS(benchmark_sphere({}, losses, variants, seeds),
                    std::invalid_argument);
    CHECK_THROWS_AS(benchmark_sphere(sigmas, losses, {"affine"}, seeds),
                    std::invalid_argument);

    write_bench_table_csv("bench_table_test.csv", report);
    write_bench_points_csv("bench_points_test.csv", report);
    std::ifstream table("bench_table_test.csv");
    std::string header;
    std::getline(table, header);
    CHECK(header == "sigma,l2sq|quadratic,l2sq|linear");
    int rows = 0;
    for (std::string line; std::getline(table, line);) ++rows;
    CHECK(rows == 1);
    std::ifstream points("bench_points_test.csv");
    std::getline(points, header);
    CHECK(header == "sigma,loss,variant,seed,point,sq_error");
    rows = 0;
    for (std::string line; std::getline(points, line);) ++rows;
    CHECK(rows == 240);
}

TEST_CASE("latent_grid_decode spans the latent bounding box") {
    QuadraticModel para;
    para.d = 1;
    para.s = 1;
    para.c = Vector::Zero(2);
    para.Q = Matrix::Identity(2, 2);
    para.Theta = Matrix::Constant(1, 1, 1.0);
    Matrix taus(1, 3);
    taus << -1.0, 0.25, 2.0;

    const LatentGrid grid = latent_grid_decode(para, taus, 64);
    REQUIRE(grid.points.cols() == 64);
    CHECK(grid.coords(0, 0) == doctest::Approx(-1.0));
    CHECK(grid.coords(0, 63) == doctest::Approx(2.0));
    for (int i = 0; i < 64; ++i)
        CHECK(std::abs(grid.points(1, i) - grid.points(0, i) * grid.points(0, i)) < 1e-10);

    const LatentGrid mid = latent_grid_decode(para, taus, 1);
    REQUIRE(mid.points.cols() == 1);
    CHECK(mid.coords(0, 0) == doctest::Approx(0.5));
    CHECK(mid.points(0, 0) == doctest::Approx(0.5));
    CHECK(mid.points(1, 0) == doctest::Approx(0.25));
}

TEST_CASE("latent_grid_decode walks dimension 0 fastest") {
    Rng rng(9);
    QuadraticModel lin;
    lin.d = 2;
    lin.s = 0;
    lin.c = oracles::random_vector(rng, 3);
    lin.Q = retract_qr(oracles::random_matrix(rng, 3, 2));
    lin.Theta = Matrix::Zero(3, 0);
    Matrix taus(2, 2);
    taus << 0.0, 1.0,
            0.0, 2.0;
    const LatentGrid grid = latent_grid_decode(lin, taus, 3);
    REQUIRE(grid.coords.cols() == 9);
    CHECK(grid.coords.col(0).isApprox(Vector(Vector::Zero(2)), 1e-15));
    CHECK(grid.coords(0, 1) == doctest::Approx(0.5));
    CHECK(grid.coords(1, 1) == doctest::Approx(0.0));
    CHECK(grid.coords(0, 3) == doctest::Approx(0.0));
    CHECK(grid.coords(1, 3) == doctest::Approx(1.0));
    CHECK(grid.coords(0, 8) == doctest::Approx(1.0));
    CHECK(grid.coords(1, 8) == doctest::Approx(2.0));

    // linear model: decoded cloud has affine rank <= d
    Matrix centered = grid.points.colwise() - Vector(grid.points.rowwise().mean());
    Eigen::JacobiSVD<Matrix> svd(centered);
    CHECK(svd.singularValues()[2] < 1e-12);
}

TEST_CASE("latent_grid_decode guards the grid size") {
    Rng rng(10);
    const QuadraticModel model = oracles::random_model(rng, 6, 4, 1);
    const Matrix taus = oracles::random_matrix(rng, 4, 5);
    CHECK_THROWS_AS(latent_grid_decode(model, taus, 100), std::invalid_argument);
    CHECK_THROWS_AS(latent_grid_decode(model, Matrix(oracles::random_matrix(rng, 3, 5)), 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(latent_grid_decode(model, taus, 0), std::invalid_argument);
}

TEST_CASE("mean_circle_distance measures radial deviation") {
    Matrix on(2, 4);
    on << 1.0, 0.0, -1.0, 0.0,
          0.0, 1.0, 0.0, -1.0;
    CHECK(mean_circle_distance(on) == 0.0);
    Matrix off(2, 2);
    off << 2.0, 0.5,
           0.0, 0.0;
    CHECK(mean_circle_distance(off) == doctest::Approx(0.75));
    CHECK_THROWS_AS(mean_circle_distance(Matrix::Zero(3, 2)), std::invalid_argument);
}

TEST_CASE("toy2d_run produces both fits with plot-ready curves") {
    FitConfig fc;
    fc.max_iters = 300;
    fc.tol = 1e-8;
    fc.seed = 11;
    const Toy2dResult res = toy2d_run(2.0, 60, 0.2, 11, fc, 64);
    CHECK(res.data.X.cols() == 60);
    CHECK(res.quad_curve.points.cols() == 64);
    CHECK(res.linear_curve.points.cols() == 64);
    CHECK(res.quad_proj.cols() == 60);
    CHECK(res.linear_proj.cols() == 60);
    CHECK(res.quad.model.s == 1);
    CHECK(res.linear.model.Theta.norm() == 0.0);
    CHECK(std::isfinite(res.quad_mean_dist));
    CHECK(std::isfinite(res.linear_mean_dist));
    Matrix quad_at_latents(2, 60);
    for (int i = 0; i < 60; ++i)
        quad_at_latents.col(i) = evaluate(res.quad.model, res.quad.taus.col(i));
    CHECK(res.quad_mean_dist ==
          doctest::Approx(mean_circle_distance(quad_at_latents)));
    // the linear fit is a straight line: its fitted points leave the circle
    CHECK(res.linear_mean_dist > 0.01);
    CHECK_THROWS_AS(toy2d_run(0.5, 60, 0.2, 11, fc), std::invalid_argument);
}
