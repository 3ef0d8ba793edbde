#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>

#include "scqm/types.hpp"

namespace scqm {

// Seedable generator: an mt19937_64 core with explicit transforms so draws
// depend only on the seed and call sequence, not on library-specific
// distribution implementations. Sub-streams: substream(seed, i) derives an
// independent generator for column i, so per-column generation can run in
// parallel and still reproduce the sequential result.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng substream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t raw() { return engine_(); }

    double uniform();     // [0, 1), 53-bit resolution
    double normal();      // N(0, 1) via Box-Muller
    int rademacher();     // -1 or +1 with equal probability

    // Gamma(shape, 1). Marsaglia-Tsang for shape >= 1; for shape < 1 the
    // boost Gamma(a) = Gamma(a+1) * Uniform^{1/a}.
    double gamma(double shape);

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

double sample_gamma(double shape, Rng& rng);

// i.i.d. entries with density proportional to exp(-|t/scale|^p):
// t = scale * sign * u^{1/p}, u ~ Gamma(1/p, 1).
Matrix sample_generalized_gaussian(double p, int dim, int n, Rng& rng, double scale = 1.0);

// Isotropic density proportional to exp(-||eps||_2 / scale): radius
// scale * Gamma(dim, 1) times a uniform direction.
Matrix sample_radial_laplace(int dim, int n, Rng& rng, double scale = 1.0);

Matrix sample_gaussian(double sigma, int dim, int n, Rng& rng);

struct NoiseSpec {
    enum class Kind { None, GeneralizedGaussian, RadialLaplace, Gaussian };

    Kind kind = Kind::None;
    double p = 2.0;       // GeneralizedGaussian shape
    double sigma = 0.0;   // Gaussian standard deviation
    double scale = 1.0;   // optional multiplier for the heavy-tailed families

    static NoiseSpec none() { return {}; }
    static NoiseSpec gg(double p, double scale = 1.0);
    static NoiseSpec radial_laplace(double scale = 1.0);
    static NoiseSpec gaussian(double sigma);

    std::string to_string() const;
};

struct DatasetMeta {
    std::string generator;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
};

struct Dataset {
    Matrix X;                       // D x n, one sample per column
    std::optional<Matrix> X_clean;  // same shape when ground truth exists
    DatasetMeta meta;

    int ambient_dim() const { return static_cast<int>(X.rows()); }
    int size() const { return static_cast<int>(X.cols()); }
};

// Unit circle samples at t_i equally spaced in [0, 4], plus noise.
Dataset circle_dataset(int n, const NoiseSpec& noise, std::uint64_t seed);

// n uniform points on the unit 2-sphere in R^3 plus N(0, sigma^2 I) noise.
Dataset sphere_dataset(int n, double sigma, std::uint64_t seed);

}  // namespace scqm
