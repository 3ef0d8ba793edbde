#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace scqm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Latent coordinates: one d-dimensional column per sample.
using LatentCoords = Eigen::MatrixXd;

// Numerical breakdown: diverged objective, singular linear system, and the
// like. The CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rank-deficient input to the QR retraction. The optimizer treats this as a
// signal to shrink the step rather than a hard failure.
struct RankDeficiencyError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace scqm
