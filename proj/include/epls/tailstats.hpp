#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epls/gen.hpp"

namespace epls {

/// H_k = (1/k) sum_{i<=k} log Y_{n-i+1,n} - log Y_{n-k,n}, for k = 1..k_max.
[[nodiscard]] std::vector<double> hill_curve(std::span<const double> y, std::size_t k_max);

struct PlateauSettings {
    std::size_t window = 10;
    double slope_tol = 2e-4;  // per index step
    double var_tol = 0.05;    // bound on the window's sample standard deviation
    double gamma_min = 0.2;

    /// window = max(10, floor(0.3 k_max)); other fields at their defaults.
    [[nodiscard]] static PlateauSettings defaults_for(std::size_t k_max);
};

struct Plateau {
    std::size_t k_start = 0;  // 1-based, inclusive
    std::size_t k_end = 0;
    double gamma_mean = 0.0;
};

/// Slides a window over the Hill curve; a window qualifies when its least-squares
/// slope, its standard deviation and its mean pass the settings. Returns the
/// longest run of consecutive qualifying windows (earliest on ties).
[[nodiscard]] std::optional<Plateau> detect_plateau(std::span<const double> hill, const PlateauSettings& settings);

struct HillDiagnostics {
    std::vector<double> hill;
    std::optional<Plateau> plateau;
    PlateauSettings params;
};

/// Hill curve on the positive part of `y` with k_max = floor(n_pos / 2) unless
/// given, followed by plateau detection.
[[nodiscard]] HillDiagnostics hill_diagnostics(std::span<const double> y, std::optional<std::size_t> k_max = {},
                                               std::optional<PlateauSettings> settings = {});

/// Unbiased covariance between score and y over the strict exceedances y_i > threshold.
[[nodiscard]] double tail_covariance(std::span<const double> score, std::span<const double> y, double threshold);

struct BurrMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and variance of the Burr XII law by numerical quadrature of its density.
/// Throws DomainError when the variance is infinite (gamma / -rho >= 1/2).
[[nodiscard]] BurrMoments burr_moments(const BurrParams& burr);

struct TailIndexResult {
    bool converged = false;
    double gamma_g = 0.0;
    double exponent = 0.0;  // s = 1 / (2 gamma_g)
    std::size_t iterations = 0;
    std::string report;
};

struct TailIndexSettings {
    std::size_t mc_samples = 1'000'000;
    double tolerance = 1e-6;
    std::uint64_t seed = 20240101;
};

/// Tail index of a GARCH(1,1) process driven by standardized Burr XII
/// innovations: solves E[(alpha eta^2 + beta)^s] = 1 for s > 0 by bisection on a
/// fixed Monte-Carlo sample and returns gamma_g = 1/(2s). A missing root
/// (no sign change, or no finite variance to standardize with) is reported,
/// not thrown.
[[nodiscard]] TailIndexResult garch_tail_index(const GarchParams& garch, const BurrParams& burr,
                                               const TailIndexSettings& settings = {});

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

enum class InnovationLaw { Normal, Burr };

/// Monte-Carlo estimate of E[log(alpha Z^2 + beta)] where Z is standard normal
/// or a raw Burr XII variate; negative means strictly stationary GARCH(1,1).
[[nodiscard]] MonteCarloEstimate garch_log_moment(const GarchParams& garch, InnovationLaw law,
                                                  const BurrParams& burr = {}, std::size_t samples = 1'000'000,
                                                  std::uint64_t seed = 7);

}  // namespace epls
