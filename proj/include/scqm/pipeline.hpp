#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scqm/datagen.hpp"
#include "scqm/loss.hpp"
#include "scqm/optimizer.hpp"
#include "scqm/projection.hpp"
#include "scqm/quadmap.hpp"
#include "scqm/types.hpp"

namespace scqm {

struct DenoiseConfig {
    int K = 30;
    int d = 2;
    int s = 1;
    LossSpec loss = LossSpec::l2_squared();
    bool linear_ablation = false;  // freeze Theta = 0, robust affine fitting
    FitConfig fit;
    int multistarts = 0;           // projection restarts per point

    // Throws on hard violations, returns soft warnings.
    std::vector<std::string> validate(int n) const;
};

// Indices of the K nearest columns to x_i (self included), increasing
// distance, ties broken by smaller index.
std::vector<int> knn(const Matrix& X, int i, int K);

struct DenoiseDiagnostics {
    std::vector<int> failed_points;        // fit/projection threw; passed through
    int unconverged_projections = 0;
    std::vector<double> fit_objectives;    // final local-fit objective per point
    std::vector<double> point_objectives;  // projection objective per point
    std::vector<std::string> warnings;
};

struct DenoiseResult {
    Matrix X_hat;
    DenoiseDiagnostics diag;
};

// Per point: fit a local model on the K-neighborhood, then project the point
// onto it under the same loss. Each point derives its own rng substream from
// cfg.fit.seed, so results do not depend on the thread count.
DenoiseResult denoise(const Matrix& X, const DenoiseConfig& cfg, int threads = 1);
DenoiseResult denoise(const Dataset& ds, const DenoiseConfig& cfg, int threads = 1);

double mse(const Matrix& X_hat, const Matrix& X_clean);

struct BenchCell {
    double sigma = 0.0;
    std::string loss;
    std::string variant;  // "quadratic" or "linear"
    double mse = 0.0;     // mean of the pooled per-point squared errors
    std::vector<std::vector<double>> errors_by_seed;
    int failed_points = 0;

    int points() const {
        int n = 0;
        for (const auto& e : errors_by_seed) n += static_cast<int>(e.size());
        return n;
    }
};

struct BenchReport {
    std::vector<double> sigmas;
    std::vector<std::string> losses;
    std::vector<std::string> variants;
    std::vector<std::uint64_t> seeds;
    int n = 300, K = 30, d = 2, s = 1;
    std::vector<BenchCell> cells;

    const BenchCell& cell(double sigma, const std::string& loss,
                          const std::string& variant) const;
};

FitConfig default_bench_fit_config();

// Sphere denoising sweep: for each (sigma, seed) draw a dataset, run denoise
// for every loss x variant, pool per-point squared errors across seeds.
BenchReport benchmark_sphere(const std::vector<double>& sigmas,
                             const std::vector<LossSpec>& losses,
                             const std::vector<std::string>& variants,
                             const std::vector<std::uint64_t>& seeds,
                             int n = 300, int K = 30, int d = 2, int s = 1,
                             const FitConfig& fit_cfg = default_bench_fit_config(),
                             int threads = 1);

// Wide table (rows sigma, columns loss x variant) and long per-point format.
void write_bench_table_csv(const std::string& path, const BenchReport& report);
void write_bench_points_csv(const std::string& path, const BenchReport& report);

struct LatentGrid {
    Matrix coords;  // d x total grid latent coordinates
    Matrix points;  // D x total decoded ambient points
};

// Axis-aligned latent grid spanning [min_i tau_i, max_i tau_i] per dimension,
// decoded through f. grid_per_dim = 1 decodes the midpoint. Guards the total
// grid size at 1e6 points.
LatentGrid latent_grid_decode(const QuadraticModel& model,
                              const LatentCoords& taus, int grid_per_dim);

double mean_circle_distance(const Matrix& points);

struct Toy2dResult {
    Dataset data;
    FitResult quad;
    FitResult linear;
    LatentGrid quad_curve;
    LatentGrid linear_curve;
    Matrix quad_proj;    // 2 x n projections of the data onto each fit
    Matrix linear_proj;
    double quad_mean_dist = 0.0;    // mean | ||f(tau_i)|| - 1 | at the fitted latents
    double linear_mean_dist = 0.0;
};

// Circle toy: generalized Gaussian noise with shape p matched by the lpp loss;
// quadratic (d=1, s=1) vs linear-ablation fits of the same data.
Toy2dResult toy2d_run(double p, int n, double noise_scale, std::uint64_t seed,
                      const FitConfig& fit_cfg = {}, int grid_points = 256);

}  // namespace scqm
