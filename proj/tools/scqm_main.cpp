#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scqm/analysis.hpp"
#include "scqm/datagen.hpp"
#include "scqm/io.hpp"
#include "scqm/loss.hpp"
#include "scqm/optimizer.hpp"
#include "scqm/pipeline.hpp"
#include "scqm/projection.hpp"
#include "scqm/quadmap.hpp"
#include "scqm/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string config_path;
    std::string loss = "l2sq";
    std::string out_dir = ".";
    bool quiet = false;
    bool seed_given = false;
    bool loss_given = false;
};

std::map<std::string, std::string> load_config_map(const GlobalOpts& g) {
    if (g.config_path.empty()) return {};
    return scqm::read_config(g.config_path);
}

scqm::FitConfig make_fit_config(const GlobalOpts& g,
                                const std::map<std::string, std::string>& kv,
                                const CLI::App* sub) {
    scqm::FitConfig cfg;
    scqm::apply_fit_config(cfg, kv);
    if (sub->count("--max-iters")) cfg.max_iters = sub->get_option("--max-iters")->as<int>();
    if (sub->count("--tol")) cfg.tol = sub->get_option("--tol")->as<double>();
    if (!kv.count("seed") || g.seed_given) cfg.seed = g.seed;
    return cfg;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw scqm::IoError("cannot create output directory: " + dir);
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
    return (fs::path(g.out_dir) / name).string();
}

scqm::NoiseSpec parse_noise(const std::string& text, double scale) {
    if (text == "none") return scqm::NoiseSpec::none();
    if (text == "radial_laplace") return scqm::NoiseSpec::radial_laplace(scale);
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (head == "gg") {
        const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
        if (args.rfind("p=", 0) != 0)
            throw std::invalid_argument("noise spec needs gg:p=<value>");
        return scqm::NoiseSpec::gg(std::stod(args.substr(2)), scale);
    }
    if (head == "gaussian") {
        const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
        if (args.rfind("sigma=", 0) != 0)
            throw std::invalid_argument("noise spec needs gaussian:sigma=<value>");
        return scqm::NoiseSpec::gaussian(std::stod(args.substr(6)));
    }
    throw std::invalid_argument("unknown noise spec: " + text);
}

std::vector<std::string> latent_header(int d) {
    std::vector<std::string> h;
    for (int j = 0; j < d; ++j) h.push_back("tau" + std::to_string(j));
    return h;
}

std::vector<std::string> coord_header(int D, const std::string& prefix) {
    std::vector<std::string> h;
    for (int j = 0; j < D; ++j) h.push_back(prefix + std::to_string(j));
    return h;
}

int run_gen(const GlobalOpts& g, const std::string& manifold, int n, double sigma,
            const std::string& noise, double noise_scale) {
    scqm::Dataset ds;
    if (manifold == "circle")
        ds = scqm::circle_dataset(n, parse_noise(noise, noise_scale), g.seed);
    else if (manifold == "sphere")
        ds = scqm::sphere_dataset(n, sigma, g.seed);
    else
        throw std::invalid_argument("unknown manifold (use circle or sphere): " + manifold);
    scqm::write_dataset(g.out_dir, ds);
    if (!g.quiet)
        std::cout << "gen: wrote " << ds.size() << " samples to " << g.out_dir << "\n";
    return 0;
}

int run_fit(const GlobalOpts& g, const CLI::App* sub, const std::string& data_path,
            int d, int s, bool linear) {
    const auto kv = load_config_map(g);
    const scqm::FitConfig cfg = make_fit_config(g, kv, sub);
    const scqm::LossSpec loss = scqm::LossSpec::parse(g.loss);
    const scqm::Dataset ds = scqm::read_dataset_csv(data_path);
    const scqm::FitResult res = scqm::fit(ds, d, s, loss, cfg, linear);
    ensure_out_dir(g.out_dir);
    scqm::save_model(out_path(g, "model.json"), res.model, loss);
    scqm::write_trace_csv(out_path(g, "trace.csv"), res.trace);
    scqm::write_csv(out_path(g, "latents.csv"), res.taus.transpose(), latent_header(d));
    if (!g.quiet) {
        std::cout << "fit: objective " << scqm::format_double(res.trace.final_objective())
                  << " after " << res.trace.iterations.size() << " iterations"
                  << (res.trace.converged ? " (converged)" : " (iteration cap)") << "\n";
        for (const std::string& w : res.trace.warnings)
            std::cout << "fit: warning: " << w << "\n";
    }
    return 0;
}

int run_project(const GlobalOpts& g, const CLI::App* sub, const std::string& model_path,
                const std::string& points_path, int multistarts) {
    const auto kv = load_config_map(g);
    const scqm::FitConfig cfg = make_fit_config(g, kv, sub);
    const auto [model, model_loss] = scqm::load_model(model_path);
    const scqm::LossSpec loss =
        g.loss_given ? scqm::LossSpec::parse(g.loss) : model_loss;
    const scqm::Matrix pts = scqm::read_csv(points_path).transpose();
    if (pts.rows() != model.ambient_dim())
        throw std::invalid_argument("project: points dimension does not match model");
    const int n = static_cast<int>(pts.cols());
    scqm::Matrix table(n, model.d + model.ambient_dim() + 2);
    for (int i = 0; i < n; ++i) {
        const scqm::ProjectResult pr =
            scqm::project(model, pts.col(i), loss, cfg, multistarts);
        table.block(i, 0, 1, model.d) = pr.tau.transpose();
        table.block(i, model.d, 1, model.ambient_dim()) = pr.y_hat.transpose();
        table(i, model.d + model.ambient_dim()) = pr.converged ? 1.0 : 0.0;
        table(i, model.d + model.ambient_dim() + 1) = pr.grad_norm;
    }
    std::vector<std::string> header = latent_header(model.d);
    for (const auto& h : coord_header(model.ambient_dim(), "yhat")) header.push_back(h);
    header.push_back("converged");
    header.push_back("grad_norm");
    ensure_out_dir(g.out_dir);
    scqm::write_csv(out_path(g, "projected.csv"), table, header);
    if (!g.quiet) std::cout << "project: wrote " << n << " projections\n";
    return 0;
}

int run_denoise(const GlobalOpts& g, const CLI::App* sub, const std::string& data_path,
                int K, int d, int s, bool linear, int threads, int multistarts) {
    const auto kv = load_config_map(g);
    scqm::DenoiseConfig cfg;
    cfg.K = K;
    cfg.d = d;
    cfg.s = s;
    cfg.loss = scqm::LossSpec::parse(g.loss);
    cfg.linear_ablation = linear;
    cfg.fit = make_fit_config(g, kv, sub);
    cfg.multistarts = multistarts;
    const scqm::Dataset ds = scqm::read_dataset_csv(data_path);
    const scqm::DenoiseResult res = scqm::denoise(ds, cfg, threads);
    ensure_out_dir(g.out_dir);
    scqm::write_csv(out_path(g, "denoised.csv"), res.X_hat.transpose(),
                    coord_header(ds.ambient_dim(), "x"));
    json diag;
    diag["failed_points"] = res.diag.failed_points;
    diag["unconverged_projections"] = res.diag.unconverged_projections;
    diag["warnings"] = res.diag.warnings;
    if (ds.X_clean) diag["mse_vs_clean"] = scqm::mse(res.X_hat, *ds.X_clean);
    std::ofstream f(out_path(g, "diagnostics.json"));
    if (!f) throw scqm::IoError("cannot open for writing: diagnostics.json");
    f << diag.dump(2) << "\n";
    if (!g.quiet) {
        std::cout << "denoise: " << ds.size() << " points, "
                  << res.diag.failed_points.size() << " failed\n";
        if (ds.X_clean)
            std::cout << "denoise: mse vs clean "
                      << scqm::format_double(scqm::mse(res.X_hat, *ds.X_clean)) << "\n";
    }
    return 0;
}

int run_bench(const GlobalOpts& g, const CLI::App* sub, std::vector<double> sigmas,
              std::vector<std::string> loss_names, std::vector<std::string> variants,
              std::vector<std::uint64_t> seeds, int n, int K, int d, int s, int threads) {
    const auto kv = load_config_map(g);
    scqm::FitConfig cfg = scqm::default_bench_fit_config();
    scqm::apply_fit_config(cfg, kv);
    if (sub->count("--max-iters")) cfg.max_iters = sub->get_option("--max-iters")->as<int>();
    if (sub->count("--tol")) cfg.tol = sub->get_option("--tol")->as<double>();
    std::vector<scqm::LossSpec> losses;
    for (const std::string& ln : loss_names) losses.push_back(scqm::LossSpec::parse(ln));
    const scqm::BenchReport report =
        scqm::benchmark_sphere(sigmas, losses, variants, seeds, n, K, d, s, cfg, threads);
    ensure_out_dir(g.out_dir);
    scqm::write_bench_table_csv(out_path(g, "bench_table.csv"), report);
    scqm::write_bench_points_csv(out_path(g, "bench_points.csv"), report);
    if (!g.quiet)
        for (const scqm::BenchCell& cell : report.cells)
            std::cout << "bench: sigma " << scqm::format_double(cell.sigma) << " "
                      << cell.loss << " " << cell.variant << " mse "
                      << scqm::format_double(cell.mse) << "\n";
    return 0;
}

int run_toy2d(const GlobalOpts& g, const CLI::App* sub, std::vector<double> ps, int n,
              double noise_scale, int grid) {
    const auto kv = load_config_map(g);
    const scqm::FitConfig cfg = make_fit_config(g, kv, sub);
    ensure_out_dir(g.out_dir);
    scqm::Matrix summary(static_cast<int>(ps.size()), 3);
    for (size_t pi = 0; pi < ps.size(); ++pi) {
        const double p = ps[pi];
        const scqm::Toy2dResult res = scqm::toy2d_run(p, n, noise_scale, g.seed, cfg, grid);
        const std::string tag = "toy_p" + scqm::format_double(p) + "_";
        scqm::write_csv(out_path(g, tag + "data.csv"), res.data.X.transpose(),
                        coord_header(2, "x"));
        scqm::write_csv(out_path(g, tag + "curve_quad.csv"),
                        res.quad_curve.points.transpose(), coord_header(2, "x"));
        scqm::write_csv(out_path(g, tag + "curve_linear.csv"),
                        res.linear_curve.points.transpose(), coord_header(2, "x"));
        const int nn = res.data.size();
        scqm::Matrix arrows(nn, 4);  // data point -> its projection
        arrows.leftCols(2) = res.data.X.transpose();
        arrows.rightCols(2) = res.quad_proj.transpose();
        scqm::write_csv(out_path(g, tag + "proj_quad.csv"), arrows,
                        {"x0", "x1", "proj0", "proj1"});
        arrows.rightCols(2) = res.linear_proj.transpose();
        scqm::write_csv(out_path(g, tag + "proj_linear.csv"), arrows,
                        {"x0", "x1", "proj0", "proj1"});
        summary(static_cast<int>(pi), 0) = p;
        summary(static_cast<int>(pi), 1) = res.quad_mean_dist;
        summary(static_cast<int>(pi), 2) = res.linear_mean_dist;
        if (!g.quiet)
            std::cout << "toy2d: p " << scqm::format_double(p) << " quad dist "
                      << scqm::format_double(res.quad_mean_dist) << " linear dist "
                      << scqm::format_double(res.linear_mean_dist) << "\n";
    }
    scqm::write_csv(out_path(g, "toy_summary.csv"), summary,
                    {"p", "quad_mean_dist", "linear_mean_dist"});
    return 0;
}

int run_sensitivity(const GlobalOpts& g, const CLI::App* sub, const std::string& data_path,
                    const std::string& deltas_path, double delta_scale) {
    const auto kv = load_config_map(g);
    scqm::FitConfig cfg = make_fit_config(g, kv, sub);
    cfg.tol = std::min(cfg.tol, 1e-10);
    cfg.max_iters = std::max(cfg.max_iters, 5000);
    const scqm::LossSpec loss = scqm::LossSpec::parse(g.loss);
    const scqm::Matrix X = scqm::read_csv(data_path).transpose();
    scqm::Matrix deltas;
    if (!deltas_path.empty()) {
        deltas = scqm::read_csv(deltas_path).transpose();
    } else {
        scqm::Rng rng(g.seed);
        deltas = scqm::sample_gaussian(delta_scale, static_cast<int>(X.rows()),
                                       static_cast<int>(X.cols()), rng);
    }
    const scqm::Vector predicted = scqm::sensitivity(X, loss, deltas, cfg);
    const scqm::Vector c0 = scqm::frechet_mean(X, loss, cfg).c;
    const scqm::Vector c1 = scqm::frechet_mean(X + deltas, loss, cfg).c;
    const scqm::Vector resolved = c1 - c0;
    const double rel_err =
        (predicted - resolved).norm() / std::max(resolved.norm(), 1e-300);
    json rep;
    rep["loss"] = loss.to_string();
    rep["predicted_delta_c"] = std::vector<double>(predicted.data(),
                                                   predicted.data() + predicted.size());
    rep["resolved_delta_c"] = std::vector<double>(resolved.data(),
                                                  resolved.data() + resolved.size());
    rep["relative_error"] = rel_err;
    ensure_out_dir(g.out_dir);
    std::ofstream f(out_path(g, "sensitivity.json"));
    if (!f) throw scqm::IoError("cannot open for writing: sensitivity.json");
    f << rep.dump(2) << "\n";
    if (!g.quiet)
        std::cout << "sensitivity: relative error " << scqm::format_double(rel_err) << "\n";
    return 0;
}

int run_convexity(const GlobalOpts& g, const std::string& model_path,
                  std::vector<double> x_coords, int samples, double spread) {
    const auto [model, model_loss] = scqm::load_model(model_path);
    const scqm::LossSpec loss =
        g.loss_given ? scqm::LossSpec::parse(g.loss) : model_loss;
    if (static_cast<int>(x_coords.size()) != model.ambient_dim())
        throw std::invalid_argument("convexity: --x must have the model's ambient dimension");
    scqm::Vector x = Eigen::Map<scqm::Vector>(x_coords.data(),
                                              static_cast<int>(x_coords.size()));
    scqm::Rng rng(g.seed);
    const scqm::ConvexityCertificate cert =
        scqm::verify_convexity_ball(model, x, loss, samples, rng, spread);
    json rep;
    rep["p"] = cert.p;
    rep["rho"] = cert.rho;
    rep["sigma0"] = cert.sigma0;
    rep["A0"] = cert.A0;
    rep["r_p"] = std::isfinite(cert.r_p) ? json(cert.r_p) : json("inf");
    rep["samples_checked"] = cert.samples_checked;
    rep["min_eig_observed"] =
        std::isnan(cert.min_eig_observed) ? json() : json(cert.min_eig_observed);
    rep["samples_outside"] = cert.samples_outside;
    rep["min_eig_outside"] =
        std::isnan(cert.min_eig_outside) ? json() : json(cert.min_eig_outside);
    ensure_out_dir(g.out_dir);
    std::ofstream f(out_path(g, "convexity.json"));
    if (!f) throw scqm::IoError("cannot open for writing: convexity.json");
    f << rep.dump(2) << "\n";
    if (!g.quiet)
        std::cout << "convexity: " << cert.samples_checked << " samples inside r_p "
                  << scqm::format_double(cert.r_p) << "\n";
    return 0;
}

int run_interpolate(const GlobalOpts& g, const std::string& model_path,
                    const std::string& latents_path, int grid) {
    const auto [model, model_loss] = scqm::load_model(model_path);
    (void)model_loss;
    const scqm::Matrix taus = scqm::read_csv(latents_path).transpose();
    if (taus.rows() != model.d)
        throw std::invalid_argument("interpolate: latents dimension does not match model");
    const scqm::LatentGrid lg = scqm::latent_grid_decode(model, taus, grid);
    const int total = static_cast<int>(lg.points.cols());
    scqm::Matrix table(total, model.d + model.ambient_dim());
    table.leftCols(model.d) = lg.coords.transpose();
    table.rightCols(model.ambient_dim()) = lg.points.transpose();
    std::vector<std::string> header = latent_header(model.d);
    for (const auto& h : coord_header(model.ambient_dim(), "x")) header.push_back(h);
    ensure_out_dir(g.out_dir);
    scqm::write_csv(out_path(g, "grid.csv"), table, header);
    if (!g.quiet) std::cout << "interpolate: decoded " << total << " grid points\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    GlobalOpts g;
    CLI::App app{"robust subspace-constrained quadratic models"};
    app.require_subcommand(1);
    app.add_option("--seed", g.seed, "rng seed");
    app.add_option("--config", g.config_path, "flat key = value config file");
    app.add_option("--loss", g.loss,
                   "loss spec: l1 | l2 | l2sq | lpp:p=<v> | huber:delta=<v>");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    gen->fallthrough();
    std::string gen_manifold;
    int gen_n = 200;
    double gen_sigma = 0.03;
    std::string gen_noise = "gg:p=2";
    double gen_noise_scale = 1.0;
    gen->add_option("manifold", gen_manifold, "circle or sphere")->required();
    gen->add_option("--n", gen_n, "number of samples");
    gen->add_option("--sigma", gen_sigma, "gaussian noise sigma (sphere)");
    gen->add_option("--noise", gen_noise,
                    "circle noise: gg:p=<v> | radial_laplace | gaussian:sigma=<v> | none");
    gen->add_option("--noise-scale", gen_noise_scale, "noise scale multiplier (circle)");

    auto* fit_cmd = app.add_subcommand("fit", "fit a model to CSV data");
    fit_cmd->fallthrough();
    std::string fit_data;
    int fit_d = 2, fit_s = 1;
    bool fit_linear = false;
    fit_cmd->add_option("data", fit_data, "samples-in-rows CSV")->required();
    fit_cmd->add_option("--d", fit_d, "latent dimension");
    fit_cmd->add_option("--s", fit_s, "normal dimension");
    fit_cmd->add_flag("--linear", fit_linear, "freeze Theta = 0 (linear ablation)");
    fit_cmd->add_option("--max-iters", "iteration cap");
    fit_cmd->add_option("--tol", "relative decrease stopping tolerance");

    auto* project_cmd = app.add_subcommand("project", "project points onto a model");
    project_cmd->fallthrough();
    std::string proj_model, proj_points;
    int proj_multistarts = 0;
    project_cmd->add_option("model", proj_model, "model JSON")->required();
    project_cmd->add_option("points", proj_points, "points-in-rows CSV")->required();
    project_cmd->add_option("--multistarts", proj_multistarts, "extra perturbed starts");
    project_cmd->add_option("--max-iters", "iteration cap");
    project_cmd->add_option("--tol", "gradient norm tolerance");

    auto* denoise_cmd = app.add_subcommand("denoise", "local-fit denoising");
    denoise_cmd->fallthrough();
    std::string den_data;
    int den_K = 30, den_d = 2, den_s = 1, den_threads = 1, den_multistarts = 0;
    bool den_linear = false;
    denoise_cmd->add_option("data", den_data, "samples-in-rows CSV")->required();
    denoise_cmd->add_option("--K", den_K, "neighborhood size");
    denoise_cmd->add_option("--d", den_d, "latent dimension");
    denoise_cmd->add_option("--s", den_s, "normal dimension");
    denoise_cmd->add_flag("--linear", den_linear, "linear ablation");
    denoise_cmd->add_option("--threads", den_threads, "worker threads");
    denoise_cmd->add_option("--multistarts", den_multistarts, "projection restarts");
    denoise_cmd->add_option("--max-iters", "iteration cap");
    denoise_cmd->add_option("--tol", "stopping tolerance");

    auto* bench_cmd = app.add_subcommand("bench-sphere", "sphere denoising sweep");
    bench_cmd->fallthrough();
    std::vector<double> bench_sigmas{0.03, 0.06};
    std::vector<std::string> bench_losses{"lpp:p=2", "l2"};
    std::vector<std::string> bench_variants{"quadratic", "linear"};
    std::vector<std::uint64_t> bench_seeds{1, 2, 3};
    int bench_n = 300, bench_K = 30, bench_d = 2, bench_s = 1, bench_threads = 1;
    bench_cmd->add_option("--sigmas", bench_sigmas, "noise levels")->delimiter(',');
    bench_cmd->add_option("--losses", bench_losses, "loss specs")->delimiter(',');
    bench_cmd->add_option("--variants", bench_variants, "quadratic,linear")->delimiter(',');
    bench_cmd->add_option("--seeds", bench_seeds, "dataset seeds")->delimiter(',');
    bench_cmd->add_option("--n", bench_n, "points per dataset");
    bench_cmd->add_option("--K", bench_K, "neighborhood size");
    bench_cmd->add_option("--d", bench_d, "latent dimension");
    bench_cmd->add_option("--s", bench_s, "normal dimension");
    bench_cmd->add_option("--threads", bench_threads, "worker threads");
    bench_cmd->add_option("--max-iters", "iteration cap per local fit");
    bench_cmd->add_option("--tol", "stopping tolerance per local fit");

    auto* toy_cmd = app.add_subcommand("toy2d", "circle toy: quadratic vs linear fits");
    toy_cmd->fallthrough();
    std::vector<double> toy_ps{1.0, 1.25, 1.5, 1.75, 2.0};
    int toy_n = 200, toy_grid = 256;
    double toy_noise_scale = 0.1;
    toy_cmd->add_option("--ps", toy_ps, "shape parameters")->delimiter(',');
    toy_cmd->add_option("--n", toy_n, "number of samples");
    toy_cmd->add_option("--noise-scale", toy_noise_scale, "noise scale multiplier");
    toy_cmd->add_option("--grid", toy_grid, "curve samples");
    toy_cmd->add_option("--max-iters", "iteration cap");
    toy_cmd->add_option("--tol", "stopping tolerance");

    auto* sens_cmd = app.add_subcommand("sensitivity", "Frechet-mean sensitivity report");
    sens_cmd->fallthrough();
    std::string sens_data, sens_deltas;
    double sens_scale = 1e-4;
    sens_cmd->add_option("data", sens_data, "samples-in-rows CSV")->required();
    sens_cmd->add_option("--deltas", sens_deltas, "perturbations-in-rows CSV");
    sens_cmd->add_option("--delta-scale", sens_scale, "random perturbation scale");
    sens_cmd->add_option("--max-iters", "iteration cap");
    sens_cmd->add_option("--tol", "gradient tolerance");

    auto* conv_cmd = app.add_subcommand("convexity", "Hessian certificate report");
    conv_cmd->fallthrough();
    std::string conv_model;
    std::vector<double> conv_x;
    int conv_samples = 200;
    double conv_spread = 1.0;
    conv_cmd->add_option("model", conv_model, "model JSON")->required();
    conv_cmd->add_option("--x", conv_x, "ambient point coordinates")
        ->required()
        ->delimiter(',');
    conv_cmd->add_option("--samples", conv_samples, "latent samples");
    conv_cmd->add_option("--spread", conv_spread, "latent sampling spread");

    auto* interp_cmd = app.add_subcommand("interpolate", "decode a latent grid");
    interp_cmd->fallthrough();
    std::string interp_model, interp_latents;
    int interp_grid = 20;
    interp_cmd->add_option("model", interp_model, "model JSON")->required();
    interp_cmd->add_option("--latents", interp_latents, "fitted latents CSV")->required();
    interp_cmd->add_option("--grid", interp_grid, "grid points per latent dimension");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    g.seed_given = app.count("--seed") > 0;
    g.loss_given = app.count("--loss") > 0;

    const CLI::App* sub = app.get_subcommands().front();
    try {
        if (sub == gen)
            return run_gen(g, gen_manifold, gen_n, gen_sigma, gen_noise, gen_noise_scale);
        if (sub == fit_cmd) return run_fit(g, sub, fit_data, fit_d, fit_s, fit_linear);
        if (sub == project_cmd)
            return run_project(g, sub, proj_model, proj_points, proj_multistarts);
        if (sub == denoise_cmd)
            return run_denoise(g, sub, den_data, den_K, den_d, den_s, den_linear,
                               den_threads, den_multistarts);
        if (sub == bench_cmd)
            return run_bench(g, sub, bench_sigmas, bench_losses, bench_variants,
                             bench_seeds, bench_n, bench_K, bench_d, bench_s,
                             bench_threads);
        if (sub == toy_cmd) return run_toy2d(g, sub, toy_ps, toy_n, toy_noise_scale, toy_grid);
        if (sub == sens_cmd) return run_sensitivity(g, sub, sens_data, sens_deltas, sens_scale);
        if (sub == conv_cmd)
            return run_convexity(g, conv_model, conv_x, conv_samples, conv_spread);
        if (sub == interp_cmd)
            return run_interpolate(g, interp_model, interp_latents, interp_grid);
        std::cerr << "scqm: unknown subcommand\n";
        return 1;
    } catch (const scqm::IoError& e) {
        std::cerr << "scqm " << sub->get_name() << ": io error: " << e.what() << "\n";
        return 3;
    } catch (const scqm::NumericalError& e) {
        std::cerr << "scqm " << sub->get_name() << ": numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "scqm " << sub->get_name() << ": usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "scqm " << sub->get_name() << ": error: " << e.what() << "\n";
        return 2;
    }
}
