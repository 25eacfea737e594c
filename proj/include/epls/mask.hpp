#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "epls/rng.hpp"

namespace epls {

/// n x p matrix whose entries are exactly 0 (missing) or 1 (observed).
using MaskMatrix = Eigen::MatrixXd;

struct MaskConfig {
    double tau = -0.1;
    double alpha_bar = 0.5;
    /// Per-coordinate scale c_j; empty means all ones.
    std::vector<double> c;

    void validate(std::size_t p) const;
    [[nodiscard]] double scale(std::size_t j) const { return c.empty() ? 1.0 : c[j]; }
};

/// Observation probability clamp(c * y^tau, 0, 1). Requires y > 0.
[[nodiscard]] double lambda_fn(double y, double tau, double c = 1.0);

struct CorrectionProbs {
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;
};

/// Flip probabilities that restore a Bernoulli(pi) candidate to mean p_target.
[[nodiscard]] CorrectionProbs correction_probs(double pi, double p_target);

/// Binary autoregressive mask with marginal correction, E[Lambda_i^(j)] = lambda_j(y_i).
///
/// Stream layout: coordinates are drawn one after the other (j outer, i inner).
/// Step 1 consumes one uniform; every later step consumes exactly two (the
/// candidate draw, then the correction draw U, even when no correction applies).
[[nodiscard]] MaskMatrix gen_bar_mask(std::span<const double> y, std::size_t p, const MaskConfig& config, Rng& rng);

struct MaskedMatrix {
    Eigen::MatrixXd values;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> observed;
};

/// Componentwise product Lambda (.) X plus a channel marking which zeros are missing.
[[nodiscard]] MaskedMatrix apply_mask(const Eigen::MatrixXd& x, const MaskMatrix& lambda);

/// Throws DataError unless every entry is 0 or 1.
void require_binary(const MaskMatrix& lambda);

}  // namespace epls
