#include "scqm/datagen.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scqm {

namespace {

// splitmix64 finalizer, used to decorrelate substream seeds.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng Rng::substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix64(mix64(seed) ^ mix64(index + 0x51ed270b7a4fca11ULL)));
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    cached_normal_ = rad * std::sin(ang);
    has_cached_normal_ = true;
    return rad * std::cos(ang);
}

int Rng::rademacher() {
    return (engine_() & 1u) ? 1 : -1;
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0))
        throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
        // Gamma(a) = Gamma(a+1) * U^{1/a}
        const double g = gamma(shape + 1.0);
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return g * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze method.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return d * v;
    }
}

double sample_gamma(double shape, Rng& rng) {
    return rng.gamma(shape);
}

Matrix sample_generalized_gaussian(double p, int dim, int n, Rng& rng, double scale) {
    if (!(p >= 1.0))
        throw std::invalid_argument("sample_generalized_gaussian: p must be at least 1");
    if (dim <= 0 || n <= 0)
        throw std::invalid_argument("sample_generalized_gaussian: dim and n must be positive");
    Matrix E(dim, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < dim; ++i) {
            const double u = rng.gamma(1.0 / p);
            const double mag = std::pow(u, 1.0 / p);
            E(i, j) = scale * rng.rademacher() * mag;
        }
    return E;
}

Matrix sample_radial_laplace(int dim, int n, Rng& rng, double scale) {
    if (dim <= 0 || n <= 0)
        throw std::invalid_argument("sample_radial_laplace: dim and n must be positive");
    Matrix E(dim, n);
    for (int j = 0; j < n; ++j) {
        Vector dir(dim);
        double norm2 = 0.0;
        do {
            for (int i = 0; i < dim; ++i) dir[i] = rng.normal();
            norm2 = dir.squaredNorm();
        } while (norm2 == 0.0);
        dir /= std::sqrt(norm2);
        const double radius = scale * rng.gamma(static_cast<double>(dim));
        E.col(j) = radius * dir;
    }
    return E;
}

Matrix sample_gaussian(double sigma, int dim, int n, Rng& rng) {
    if (dim <= 0 || n <= 0)
        throw std::invalid_argument("sample_gaussian: dim and n must be positive");
    Matrix E(dim, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < dim; ++i) E(i, j) = sigma * rng.normal();
    return E;
}

NoiseSpec NoiseSpec::gg(double p, double scale) {
    if (!(p >= 1.0))
        throw std::invalid_argument("NoiseSpec::gg: p must be at least 1");
    if (!(scale > 0.0))
        throw std::invalid_argument("NoiseSpec::gg: scale must be positive");
    NoiseSpec spec;
    spec.kind = Kind::GeneralizedGaussian;
    spec.p = p;
    spec.scale = scale;
    return spec;
}

NoiseSpec NoiseSpec::radial_laplace(double scale) {
    if (!(scale > 0.0))
        throw std::invalid_argument("NoiseSpec::radial_laplace: scale must be positive");
    NoiseSpec spec;
    spec.kind = Kind::RadialLaplace;
    spec.scale = scale;
    return spec;
}

NoiseSpec NoiseSpec::gaussian(double sigma) {
    if (!(sigma >= 0.0))
        throw std::invalid_argument("NoiseSpec::gaussian: sigma must be nonnegative");
    NoiseSpec spec;
    spec.kind = Kind::Gaussian;
    spec.sigma = sigma;
    return spec;
}

namespace {

std::string num_str(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string NoiseSpec::to_string() const {
    switch (kind) {
        case Kind::None: return "none";
        case Kind::GeneralizedGaussian: {
            std::string out = "gg:p=" + num_str(p);
            if (scale != 1.0) out += ",scale=" + num_str(scale);
            return out;
        }
        case Kind::RadialLaplace:
            return scale == 1.0 ? "radial_laplace" : "radial_laplace:scale=" + num_str(scale);
        case Kind::Gaussian: return "gaussian:sigma=" + num_str(sigma);
    }
    return "unknown";
}

namespace {

Matrix noise_matrix(const NoiseSpec& noise, int dim, int n, std::uint64_t seed) {
    // One substream per sample so the draw for column j is independent of n.
    Matrix E = Matrix::Zero(dim, n);
    switch (noise.kind) {
        case NoiseSpec::Kind::None:
            break;
        case NoiseSpec::Kind::GeneralizedGaussian:
            for (int j = 0; j < n; ++j) {
                Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(j));
                E.col(j) = sample_generalized_gaussian(noise.p, dim, 1, rng, noise.scale);
            }
            break;
        case NoiseSpec::Kind::RadialLaplace:
            for (int j = 0; j < n; ++j) {
                Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(j));
                E.col(j) = sample_radial_laplace(dim, 1, rng, noise.scale);
            }
            break;
        case NoiseSpec::Kind::Gaussian:
            for (int j = 0; j < n; ++j) {
                Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(j));
                E.col(j) = sample_gaussian(noise.sigma, dim, 1, rng);
            }
            break;
    }
    return E;
}

}  // namespace

Dataset circle_dataset(int n, const NoiseSpec& noise, std::uint64_t seed) {
    if (n < 2)
        throw std::invalid_argument("circle_dataset: n must be at least 2");
    Matrix clean(2, n);
    for (int i = 0; i < n; ++i) {
        const double t = 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        clean(0, i) = std::cos(t);
        clean(1, i) = std::sin(t);
    }
    Dataset ds;
    ds.X_clean = clean;
    ds.X = clean + noise_matrix(noise, 2, n, seed);
    ds.meta.generator = "circle";
    ds.meta.params["n"] = static_cast<double>(n);
    ds.meta.seed = seed;
    switch (noise.kind) {
        case NoiseSpec::Kind::GeneralizedGaussian:
            ds.meta.params["noise_p"] = noise.p;
            ds.meta.params["noise_scale"] = noise.scale;
            break;
        case NoiseSpec::Kind::RadialLaplace:
            ds.meta.params["noise_scale"] = noise.scale;
            break;
        case NoiseSpec::Kind::Gaussian:
            ds.meta.params["noise_sigma"] = noise.sigma;
            break;
        case NoiseSpec::Kind::None:
            break;
    }
    return ds;
}

Dataset sphere_dataset(int n, double sigma, std::uint64_t seed) {
    if (n < 4)
        throw std::invalid_argument("sphere_dataset: n must be at least 4");
    if (!(sigma >= 0.0))
        throw std::invalid_argument("sphere_dataset: sigma must be nonnegative");
    Matrix clean(3, n);
    for (int j = 0; j < n; ++j) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(j));
        Vector dir(3);
        double norm2 = 0.0;
        do {
            for (int i = 0; i < 3; ++i) dir[i] = rng.normal();
            norm2 = dir.squaredNorm();
        } while (norm2 == 0.0);
        clean.col(j) = dir / std::sqrt(norm2);
    }
    Dataset ds;
    ds.X_clean = clean;
    // Independent substream block for the noise so clean points are unchanged
    // when sigma varies.
    Matrix E(3, n);
    for (int j = 0; j < n; ++j) {
        Rng rng = Rng::substream(seed ^ 0xa5a5a5a55a5a5a5aULL, static_cast<std::uint64_t>(j));
        E.col(j) = sample_gaussian(sigma, 3, 1, rng);
    }
    ds.X = clean + E;
    ds.meta.generator = "sphere";
    ds.meta.params["n"] = static_cast<double>(n);
    ds.meta.params["sigma"] = sigma;
    ds.meta.seed = seed;
    return ds;
}

}  // namespace scqm
