#include "scqm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "scqm/io.hpp"

namespace scqm {

std::vector<std::string> DenoiseConfig::validate(int n) const {
    if (d < 1 || s < 0)
        throw std::invalid_argument("DenoiseConfig: need d >= 1 and s >= 0");
    if (K < d + s + 1)
        throw std::invalid_argument("DenoiseConfig: K must be at least d+s+1");
    if (K > n)
        throw std::invalid_argument("DenoiseConfig: K exceeds the number of samples");
    if (multistarts < 0)
        throw std::invalid_argument("DenoiseConfig: multistarts must be >= 0");
    fit.validate();
    std::vector<std::string> warnings;
    if (K < 2 * (d + s))
        warnings.push_back("denoise: K below 2(d+s), local fits may be unstable");
    return warnings;
}

std::vector<int> knn(const Matrix& X, int i, int K) {
    const int n = static_cast<int>(X.cols());
    if (i < 0 || i >= n) throw std::invalid_argument("knn: index out of range");
    if (K < 1 || K > n) throw std::invalid_argument("knn: K must be in [1, n]");
    std::vector<std::pair<double, int>> dist(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j)
        dist[static_cast<size_t>(j)] = {(X.col(j) - X.col(i)).squaredNorm(), j};
    std::partial_sort(dist.begin(), dist.begin() + K, dist.end());
    std::vector<int> idx(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) idx[static_cast<size_t>(k)] = dist[static_cast<size_t>(k)].second;
    return idx;
}

namespace {

void run_chunked(int total, int threads, const std::function<void(int, int)>& work) {
    if (threads == 1 || total < 2) {
        work(0, total);
        return;
    }
    const int nt = std::min(threads, total);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nt));
    const int chunk = (total + nt - 1) / nt;
    for (int t = 0; t < nt; ++t)
        pool.emplace_back(work, t * chunk, std::min(total, (t + 1) * chunk));
    for (auto& th : pool) th.join();
}

std::uint64_t hood_hash(const std::vector<int>& idx) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the index set
    for (int v : idx) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

DenoiseResult denoise(const Matrix& X, const DenoiseConfig& cfg, int threads) {
    const int n = static_cast<int>(X.cols());
    DenoiseResult out;
    out.diag.warnings = cfg.validate(n);
    if (threads < 1) throw std::invalid_argument("denoise: threads must be >= 1");
    if (!X.allFinite())
        throw std::invalid_argument("denoise: data has non-finite entries");

    // Canonical (sorted) neighborhoods; identical sets share one local fit,
    // seeded from the set content so results do not depend on thread count or
    // point order. With K = n every point reuses a single global fit.
    std::vector<std::vector<int>> hoods(static_cast<size_t>(n));
    std::vector<int> hood_of(static_cast<size_t>(n));
    std::map<std::vector<int>, int> dedup;
    std::vector<const std::vector<int>*> distinct;
    for (int i = 0; i < n; ++i) {
        std::vector<int> idx = knn(X, i, cfg.K);
        std::sort(idx.begin(), idx.end());
        hoods[static_cast<size_t>(i)] = std::move(idx);
        const auto [it, fresh] =
            dedup.emplace(hoods[static_cast<size_t>(i)], static_cast<int>(distinct.size()));
        if (fresh) distinct.push_back(&it->first);
        hood_of[static_cast<size_t>(i)] = it->second;
    }

    const int n_fits = static_cast<int>(distinct.size());
    std::vector<FitResult> fits(static_cast<size_t>(n_fits));
    std::vector<char> fit_failed(static_cast<size_t>(n_fits), 0);
    run_chunked(n_fits, threads, [&](int begin, int end) {
        for (int f = begin; f < end; ++f) {
            const std::vector<int>& idx = *distinct[static_cast<size_t>(f)];
            Matrix local(X.rows(), cfg.K);
            for (int k = 0; k < cfg.K; ++k) local.col(k) = X.col(idx[static_cast<size_t>(k)]);
            FitConfig fit_cfg = cfg.fit;
            fit_cfg.seed = Rng::substream(cfg.fit.seed, hood_hash(idx)).raw();
            try {
                fits[static_cast<size_t>(f)] =
                    fit(local, cfg.d, cfg.s, cfg.loss, fit_cfg, cfg.linear_ablation);
            } catch (const std::exception&) {
                fit_failed[static_cast<size_t>(f)] = 1;
            }
        }
    });

    out.X_hat = X;
    out.diag.fit_objectives.assign(static_cast<size_t>(n), 0.0);
    out.diag.point_objectives.assign(static_cast<size_t>(n), 0.0);
    std::vector<char> failed(static_cast<size_t>(n), 0);
    std::vector<char> unconverged(static_cast<size_t>(n), 0);
    run_chunked(n, threads, [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            const int f = hood_of[static_cast<size_t>(i)];
            if (fit_failed[static_cast<size_t>(f)]) {
                failed[static_cast<size_t>(i)] = 1;  // point passes through unchanged
                continue;
            }
            const FitResult& fr = fits[static_cast<size_t>(f)];
            FitConfig proj_cfg = cfg.fit;
            proj_cfg.seed = Rng::substream(cfg.fit.seed, static_cast<std::uint64_t>(i)).raw();
            try {
                const ProjectResult pr =
                    project(fr.model, X.col(i), cfg.loss, proj_cfg, cfg.multistarts);
                out.X_hat.col(i) = pr.y_hat;
                out.diag.fit_objectives[static_cast<size_t>(i)] = fr.trace.final_objective();
                out.diag.point_objectives[static_cast<size_t>(i)] = pr.objective;
                if (!pr.converged) unconverged[static_cast<size_t>(i)] = 1;
            } catch (const std::exception&) {
                failed[static_cast<size_t>(i)] = 1;
            }
        }
    });

    for (int i = 0; i < n; ++i) {
        if (failed[static_cast<size_t>(i)]) out.diag.failed_points.push_back(i);
        if (unconverged[static_cast<size_t>(i)]) ++out.diag.unconverged_projections;
    }
    return out;
}

DenoiseResult denoise(const Dataset& ds, const DenoiseConfig& cfg, int threads) {
    return denoise(ds.X, cfg, threads);
}

double mse(const Matrix& X_hat, const Matrix& X_clean) {
    if (X_hat.rows() != X_clean.rows() || X_hat.cols() != X_clean.cols())
        throw std::invalid_argument("mse: shape mismatch");
    if (X_hat.cols() == 0) throw std::invalid_argument("mse: empty input");
    return (X_hat - X_clean).squaredNorm() / static_cast<double>(X_hat.cols());
}

const BenchCell& BenchReport::cell(double sigma, const std::string& loss,
                                   const std::string& variant) const {
    for (const BenchCell& c : cells)
        if (c.sigma == sigma && c.loss == loss && c.variant == variant) return c;
    throw std::invalid_argument("BenchReport: no such cell");
}

FitConfig default_bench_fit_config() {
    FitConfig cfg;
    cfg.max_iters = 300;
    cfg.tol = 1e-7;
    return cfg;
}

BenchReport benchmark_sphere(const std::vector<double>& sigmas,
                             const std::vector<LossSpec>& losses,
                             const std::vector<std::string>& variants,
                             const std::vector<std::uint64_t>& seeds,
                             int n, int K, int d, int s,
                             const FitConfig& fit_cfg, int threads) {
    if (sigmas.empty() || losses.empty() || variants.empty() || seeds.empty())
        throw std::invalid_argument("benchmark_sphere: empty grid");
    for (const std::string& v : variants)
        if (v != "quadratic" && v != "linear")
            throw std::invalid_argument("benchmark_sphere: unknown variant " + v);

    BenchReport report;
    report.sigmas = sigmas;
    for (const LossSpec& l : losses) report.losses.push_back(l.to_string());
    report.variants = variants;
    report.seeds = seeds;
    report.n = n;
    report.K = K;
    report.d = d;
    report.s = s;

    for (double sigma : sigmas)
        for (size_t li = 0; li < losses.size(); ++li)
            for (const std::string& variant : variants) {
                BenchCell cell;
                cell.sigma = sigma;
                cell.loss = report.losses[li];
                cell.variant = variant;
                report.cells.push_back(cell);
            }

    const auto find_cell = [&report](double sigma, const std::string& loss,
                                     const std::string& variant) -> BenchCell& {
        for (BenchCell& c : report.cells)
            if (c.sigma == sigma && c.loss == loss && c.variant == variant) return c;
        throw std::logic_error("benchmark_sphere: missing cell");
    };

    for (double sigma : sigmas) {
        for (std::uint64_t seed : seeds) {
            const Dataset ds = sphere_dataset(n, sigma, seed);
            for (size_t li = 0; li < losses.size(); ++li) {
                for (const std::string& variant : variants) {
                    DenoiseConfig dc;
                    dc.K = K;
                    dc.d = d;
                    dc.s = s;
                    dc.loss = losses[li];
                    dc.linear_ablation = (variant == "linear");
                    dc.fit = fit_cfg;
                    dc.fit.seed = seed;
                    const DenoiseResult res = denoise(ds.X, dc, threads);
                    std::vector<double> errors(static_cast<size_t>(n));
                    for (int i = 0; i < n; ++i)
                        errors[static_cast<size_t>(i)] =
                            (res.X_hat.col(i) - ds.X_clean->col(i)).squaredNorm();
                    BenchCell& cell = find_cell(sigma, report.losses[li], variant);
                    cell.errors_by_seed.push_back(std::move(errors));
                    cell.failed_points += static_cast<int>(res.diag.failed_points.size());
                }
            }
        }
    }

    for (BenchCell& cell : report.cells) {
        double acc = 0.0;
        int cnt = 0;
        for (const auto& e : cell.errors_by_seed) {
            acc = std::accumulate(e.begin(), e.end(), acc);
            cnt += static_cast<int>(e.size());
        }
        cell.mse = cnt ? acc / cnt : 0.0;
    }
    return report;
}

void write_bench_table_csv(const std::string& path, const BenchReport& report) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "sigma";
    for (const std::string& loss : report.losses)
        for (const std::string& variant : report.variants)
            f << ',' << loss << '|' << variant;
    f << "\n";
    for (double sigma : report.sigmas) {
        f << format_double(sigma);
        for (const std::string& loss : report.losses)
            for (const std::string& variant : report.variants)
                f << ',' << format_double(report.cell(sigma, loss, variant).mse);
        f << "\n";
    }
    if (!f) throw IoError("write failed: " + path);
}

void write_bench_points_csv(const std::string& path, const BenchReport& report) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "sigma,loss,variant,seed,point,sq_error\n";
    for (const BenchCell& cell : report.cells)
        for (size_t si = 0; si < cell.errors_by_seed.size(); ++si)
            for (size_t i = 0; i < cell.errors_by_seed[si].size(); ++i)
                f << format_double(cell.sigma) << ',' << cell.loss << ','
                  << cell.variant << ',' << report.seeds[si] << ',' << i << ','
                  << format_double(cell.errors_by_seed[si][i]) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

LatentGrid latent_grid_decode(const QuadraticModel& model,
                              const LatentCoords& taus, int grid_per_dim) {
    const int d = model.d;
    if (static_cast<int>(taus.rows()) != d)
        throw std::invalid_argument("latent_grid_decode: latent dimension mismatch");
    if (taus.cols() < 1)
        throw std::invalid_argument("latent_grid_decode: need at least one latent point");
    if (grid_per_dim < 1)
        throw std::invalid_argument("latent_grid_decode: grid_per_dim must be >= 1");
    double total_d = 1.0;
    for (int j = 0; j < d; ++j) total_d *= grid_per_dim;
    if (total_d > 1e6)
        throw std::invalid_argument("latent_grid_decode: grid exceeds 1e6 points");
    const int total = static_cast<int>(total_d);

    const Vector lo = taus.rowwise().minCoeff();
    const Vector hi = taus.rowwise().maxCoeff();
    LatentGrid grid;
    grid.coords.resize(d, total);
    grid.points.resize(model.ambient_dim(), total);
    std::vector<int> counter(static_cast<size_t>(d), 0);
    for (int idx = 0; idx < total; ++idx) {
        Vector tau(d);
        for (int j = 0; j < d; ++j) {
            const int c = counter[static_cast<size_t>(j)];
            tau[j] = (grid_per_dim == 1)
                         ? 0.5 * (lo[j] + hi[j])
                         : lo[j] + (hi[j] - lo[j]) * c / (grid_per_dim - 1);
        }
        grid.coords.col(idx) = tau;
        grid.points.col(idx) = evaluate(model, tau);
        for (int j = 0; j < d; ++j) {  // dimension 0 advances fastest
            int& c = counter[static_cast<size_t>(j)];
            if (++c < grid_per_dim) break;
            c = 0;
        }
    }
    return grid;
}

double mean_circle_distance(const Matrix& points) {
    if (points.rows() != 2 || points.cols() == 0)
        throw std::invalid_argument("mean_circle_distance: need 2 x n points");
    double acc = 0.0;
    for (int i = 0; i < points.cols(); ++i)
        acc += std::abs(points.col(i).norm() - 1.0);
    return acc / static_cast<double>(points.cols());
}

Toy2dResult toy2d_run(double p, int n, double noise_scale, std::uint64_t seed,
                      const FitConfig& fit_cfg, int grid_points) {
    if (!(p >= 1.0)) throw std::invalid_argument("toy2d_run: p must be >= 1");
    Toy2dResult out;
    out.data = circle_dataset(n, NoiseSpec::gg(p, noise_scale), seed);
    const LossSpec loss = LossSpec::lpp(p);
    out.quad = fit(out.data.X, 1, 1, loss, fit_cfg, false);
    out.linear = fit(out.data.X, 1, 1, loss, fit_cfg, true);
    out.quad_curve = latent_grid_decode(out.quad.model, out.quad.taus, grid_points);
    out.linear_curve = latent_grid_decode(out.linear.model, out.linear.taus, grid_points);
    out.quad_proj.resize(2, n);
    out.linear_proj.resize(2, n);
    for (int i = 0; i < n; ++i) {
        out.quad_proj.col(i) = project(out.quad.model, out.data.X.col(i), loss, fit_cfg).y_hat;
        out.linear_proj.col(i) =
            project(out.linear.model, out.data.X.col(i), loss, fit_cfg).y_hat;
    }
    // Circle distance is measured where the model actually represents the
    // data: at the fitted latent coordinates. Grid curves keep the full
    // latent span for plotting, but a handful of outlier latents would let
    // that span dominate a grid-based mean.
    Matrix quad_fit_pts(2, n), linear_fit_pts(2, n);
    for (int i = 0; i < n; ++i) {
        quad_fit_pts.col(i) = evaluate(out.quad.model, out.quad.taus.col(i));
        linear_fit_pts.col(i) = evaluate(out.linear.model, out.linear.taus.col(i));
    }
    out.quad_mean_dist = mean_circle_distance(quad_fit_pts);
    out.linear_mean_dist = mean_circle_distance(linear_fit_pts);
    return out;
}

}  // namespace scqm
