#include "epls/mask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "epls/error.hpp"

namespace epls {

void MaskConfig::validate(std::size_t p) const {
    if (!(tau < 0.0)) throw ConfigError("mask: tau must be negative");
    if (!(alpha_bar >= 0.0 && alpha_bar < 1.0)) throw ConfigError("mask: alpha_bar must lie in [0,1)");
    if (!c.empty() && c.size() != p) throw ConfigError("mask: c must have one entry per coordinate");
    for (double cj : c) {
        if (!(cj > 0.0)) throw ConfigError("mask: every c_j must be positive");
    }
}

double lambda_fn(double y, double tau, double c) {
    if (!(y > 0.0)) throw DomainError("lambda_fn: y must be positive, got " + std::to_string(y));
    return std::clamp(c * std::pow(y, tau), 0.0, 1.0);
}

CorrectionProbs correction_probs(double pi, double p_target) {
    if (!(pi >= 0.0 && pi <= 1.0) || !(p_target >= 0.0 && p_target <= 1.0)) {
        throw DomainError("correction_probs: probabilities must lie in [0,1]");
    }
    CorrectionProbs out;
    if (pi < p_target) out.gamma_plus = (p_target - pi) / (1.0 - pi);
    if (pi > p_target) out.gamma_minus = (pi - p_target) / pi;
    return out;
}

MaskMatrix gen_bar_mask(std::span<const double> y, std::size_t p, const MaskConfig& config, Rng& rng) {
    config.validate(p);
    const auto n = static_cast<Eigen::Index>(y.size());
    MaskMatrix lambda = MaskMatrix::Zero(n, static_cast<Eigen::Index>(p));
    if (n == 0) return lambda;

    std::vector<double> base_prob(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) base_prob[i] = lambda_fn(y[i], config.tau);

    for (std::size_t j = 0; j < p; ++j) {
        const double cj = config.scale(j);
        const auto col = static_cast<Eigen::Index>(j);
        auto target = [&](std::size_t i) { return std::min(1.0, cj * base_prob[i]); };

        double prev = rng.bernoulli(target(0)) ? 1.0 : 0.0;
        lambda(0, col) = prev;
        for (std::size_t i = 1; i < y.size(); ++i) {
            const double p_i = target(i);
            const double pi = config.alpha_bar * prev + (1.0 - config.alpha_bar) * p_i;
            const bool candidate = rng.bernoulli(pi);
            const double u = rng.uniform();
            const CorrectionProbs corr = correction_probs(std::clamp(pi, 0.0, 1.0), p_i);

            bool value = candidate;
            if (pi < p_i && u < corr.gamma_plus && !candidate) {
                value = true;
            } else if (pi > p_i && u < corr.gamma_minus && candidate) {
                value = false;
            }
            prev = value ? 1.0 : 0.0;
            lambda(static_cast<Eigen::Index>(i), col) = prev;
        }
    }
    return lambda;
}

MaskedMatrix apply_mask(const Eigen::MatrixXd& x, const MaskMatrix& lambda) {
    if (x.rows() != lambda.rows() || x.cols() != lambda.cols()) {
        throw DataError("apply_mask: shape mismatch (" + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                        " vs " + std::to_string(lambda.rows()) + "x" + std::to_string(lambda.cols()) + ")");
    }
    require_binary(lambda);
    MaskedMatrix out;
    out.observed = lambda.array() != 0.0;
    out.values = out.observed.select(x, Eigen::MatrixXd::Zero(x.rows(), x.cols()));
    return out;
}

void require_binary(const MaskMatrix& lambda) {
    const bool ok = ((lambda.array() == 0.0) || (lambda.array() == 1.0)).all();
    if (!ok) throw DataError("mask entries must be exactly 0 or 1");
}

}  // namespace epls
