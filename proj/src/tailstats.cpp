#include "epls/tailstats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "epls/error.hpp"
#include "epls/rng.hpp"

namespace epls {

std::vector<double> hill_curve(std::span<const double> y, std::size_t k_max) {
    if (y.size() < 2 || k_max < 1 || k_max > y.size() - 1) {
        throw DomainError("hill_curve: need 1 <= k_max <= n - 1");
    }
    std::vector<double> sorted(y.begin(), y.end());
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k_max + 1), sorted.end(),
                      std::greater<>());
    if (!(sorted[k_max] > 0.0)) {
        throw DomainError("hill_curve: nonpositive order statistic among the top k_max + 1");
    }
    // S_k = sum_{i<=k} (L_i - L_{k+1}) = S_{k-1} + k (L_k - L_{k+1}); every term is
    // a nonnegative log spacing, so ties contribute exact zeros.
    std::vector<double> hill(k_max);
    double spacing_sum = 0.0;
    double log_prev = std::log(sorted[0]);
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double log_next = std::log(sorted[k]);
        spacing_sum += static_cast<double>(k) * (log_prev - log_next);
        hill[k - 1] = spacing_sum / static_cast<double>(k);
        log_prev = log_next;
    }
    return hill;
}

PlateauSettings PlateauSettings::defaults_for(std::size_t k_max) {
    PlateauSettings s;
    s.window = std::max<std::size_t>(10, static_cast<std::size_t>(0.3 * static_cast<double>(k_max)));
    return s;
}

namespace {

struct WindowStats {
    double mean;
    double sd;
    double slope;
};

WindowStats window_stats(std::span<const double> values) {
    const auto w = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= w;
    const double x_mean = (w - 1.0) / 2.0;
    double sxx = 0.0;
    double sxy = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double dx = static_cast<double>(i) - x_mean;
        const double dv = values[i] - mean;
        sxx += dx * dx;
        sxy += dx * dv;
        ss += dv * dv;
    }
    return {mean, std::sqrt(ss / (w - 1.0)), sxy / sxx};
}

}  // namespace

std::optional<Plateau> detect_plateau(std::span<const double> hill, const PlateauSettings& settings) {
    if (settings.window < 2) throw DomainError("detect_plateau: window must be at least 2");
    if (hill.size() < settings.window) throw DomainError("detect_plateau: Hill curve shorter than the window");

    const std::size_t n_windows = hill.size() - settings.window + 1;
    std::size_t best_start = 0;
    std::size_t best_len = 0;
    std::size_t run_start = 0;
    std::size_t run_len = 0;
    for (std::size_t s = 0; s < n_windows; ++s) {
        const WindowStats st = window_stats(hill.subspan(s, settings.window));
        const bool ok =
            std::abs(st.slope) <= settings.slope_tol && st.sd <= settings.var_tol && st.mean > settings.gamma_min;
        if (ok) {
            if (run_len == 0) run_start = s;
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best_start = run_start;
            }
        } else {
            run_len = 0;
        }
    }
    if (best_len == 0) return std::nullopt;

    Plateau plateau;
    plateau.k_start = best_start + 1;
    plateau.k_end = best_start + best_len - 1 + settings.window;
    double sum = 0.0;
    for (std::size_t k = plateau.k_start; k <= plateau.k_end; ++k) sum += hill[k - 1];
    plateau.gamma_mean = sum / static_cast<double>(plateau.k_end - plateau.k_start + 1);
    return plateau;
}

HillDiagnostics hill_diagnostics(std::span<const double> y, std::optional<std::size_t> k_max,
                                 std::optional<PlateauSettings> settings) {
    std::vector<double> positive;
    positive.reserve(y.size());
    for (double v : y) {
        if (v > 0.0 && std::isfinite(v)) positive.push_back(v);
    }
    HillDiagnostics out;
    const std::size_t kmax = k_max.value_or(positive.size() / 2);
    out.params = settings.value_or(PlateauSettings::defaults_for(kmax));
    if (kmax < 1 || positive.size() < kmax + 1) return out;
    out.hill = hill_curve(positive, kmax);
    if (out.hill.size() >= out.params.window) out.plateau = detect_plateau(out.hill, out.params);
    return out;
}

double tail_covariance(std::span<const double> score, std::span<const double> y, double threshold) {
    if (score.size() != y.size()) throw DataError("tail_covariance: score and y differ in length");
    std::size_t count = 0;
    double mean_s = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > threshold) {
            ++count;
            mean_s += score[i];
            mean_y += y[i];
        }
    }
    if (count < 2) throw InsufficientTailError("tail_covariance: fewer than 2 strict exceedances");
    mean_s /= static_cast<double>(count);
    mean_y /= static_cast<double>(count);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > threshold) acc += (score[i] - mean_s) * (y[i] - mean_y);
    }
    return acc / static_cast<double>(count - 1);
}

BurrMoments burr_moments(const BurrParams& burr) {
    const double tail_index = burr.gamma / -burr.rho;
    if (!(tail_index < 0.5)) {
        throw DomainError("burr_moments: variance is infinite for tail index >= 1/2");
    }
    auto moment = [&](int order) {
        auto integrand = [&](double y) { return std::pow(y, order) * burr_density(burr, y); };
        boost::math::quadrature::tanh_sinh<double> finite;
        boost::math::quadrature::exp_sinh<double> infinite;
        return finite.integrate(integrand, 0.0, 1.0, 1e-13) +
               infinite.integrate(integrand, 1.0, std::numeric_limits<double>::infinity(), 1e-13);
    };
    BurrMoments out;
    out.mean = moment(1);
    out.variance = moment(2) - out.mean * out.mean;
    return out;
}

namespace {

// Importance exponent: u is drawn with density (1 - a) u^{-a} on (0, 1) so that
// the small-u region generating extreme innovations is sampled densely.
constexpr double kImportanceExponent = 0.8;

// log of the self-normalized weighted mean of exp(s * L_i).
double log_moment(double s, std::span<const double> log_weight, std::span<const double> log_term,
                  double log_total_weight) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < log_term.size(); ++i) peak = std::max(peak, log_weight[i] + s * log_term[i]);
    double acc = 0.0;
    for (std::size_t i = 0; i < log_term.size(); ++i) acc += std::exp(log_weight[i] + s * log_term[i] - peak);
    return std::log(acc) + peak - log_total_weight;
}

}  // namespace

TailIndexResult garch_tail_index(const GarchParams& garch, const BurrParams& burr, const TailIndexSettings& settings) {
    TailIndexResult result;
    if (!(garch.alpha > 0.0)) {
        result.report = "fails: alpha = 0 leaves beta^s = 1, which has no positive root";
        return result;
    }
    if (settings.mc_samples < 2) throw DomainError("garch_tail_index: need at least 2 Monte-Carlo samples");

    BurrMoments moments;
    try {
        moments = burr_moments(burr);
    } catch (const DomainError&) {
        result.report = "fails: innovations have infinite variance and cannot be standardized";
        return result;
    }
    const double sd = std::sqrt(moments.variance);

    // Stratified draws of V, mapped through the importance density.
    Rng rng(settings.seed);
    const std::size_t n = settings.mc_samples;
    std::vector<double> log_weight(n);
    std::vector<double> log_term(n);
    const double inv = 1.0 / (1.0 - kImportanceExponent);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = (static_cast<double>(i) + rng.uniform_open()) / static_cast<double>(n);
        const double log_u = inv * std::log(v);
        const double u = std::exp(log_u);
        const double eta = u > 0.0 ? burr_sample(burr, u) : std::numeric_limits<double>::infinity();
        const double z = (eta - moments.mean) / sd;
        log_weight[i] = kImportanceExponent * log_u;
        log_term[i] = std::log(garch.alpha * z * z + garch.beta);
    }
    double peak = -std::numeric_limits<double>::infinity();
    for (double lw : log_weight) peak = std::max(peak, lw);
    double total = 0.0;
    for (double lw : log_weight) total += std::exp(lw - peak);
    const double log_total_weight = std::log(total) + peak;

    auto h = [&](double s) { return log_moment(s, log_weight, log_term, log_total_weight); };

    // h is convex with h(0) = 0; a positive root exists only if h decreases at 0.
    double slope0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope0 += std::exp(log_weight[i] - log_total_weight) * log_term[i];
    if (!(slope0 < 0.0)) {
        result.report = "fails: E[log(alpha eta^2 + beta)] >= 0, no positive root";
        return result;
    }

    // Moments of eta^{2s} exist for 2s < 1 / tail_index.
    const double tail_index = burr.gamma / -burr.rho;
    double lo = 0.0;
    double hi = (1.0 - 1e-9) / (2.0 * tail_index);
    if (h(hi) < 0.0) {
        result.report = "fails: no sign change below the moment limit s = 1/(2 tail index)";
        return result;
    }
    while (1.0 / (2.0 * std::max(lo, 1e-300)) - 1.0 / (2.0 * hi) > settings.tolerance && result.iterations < 200) {
        const double mid = 0.5 * (lo + hi);
        if (h(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++result.iterations;
    }
    result.converged = true;
    result.exponent = 0.5 * (lo + hi);
    result.gamma_g = 1.0 / (2.0 * result.exponent);
    std::ostringstream os;
    os << "converged: gamma_g = " << result.gamma_g << " after " << result.iterations << " bisection steps";
    result.report = os.str();
    return result;
}

MonteCarloEstimate garch_log_moment(const GarchParams& garch, InnovationLaw law, const BurrParams& burr,
                                    std::size_t samples, std::uint64_t seed) {
    if (samples < 2) throw DomainError("garch_log_moment: need at least 2 samples");
    Rng rng(seed);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double z = law == InnovationLaw::Normal ? rng.normal() : burr_sample(burr, rng.uniform_open());
        const double v = std::log(garch.alpha * z * z + garch.beta);
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double var = m2 / static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples))};
}

}  // namespace epls
