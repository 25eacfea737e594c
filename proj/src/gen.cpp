#include "epls/gen.hpp"

#include <cmath>
#include <numbers>

#include "epls/error.hpp"

namespace epls {

void BurrParams::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ConfigError("burr: gamma must lie in (0,1), got " + std::to_string(gamma));
    }
    if (!(rho < 0.0)) {
        throw ConfigError("burr: rho must be negative, got " + std::to_string(rho));
    }
}

void ArmaParams::validate() const {
    if (!(std::abs(phi) < 1.0) || !std::isfinite(theta)) {
        throw ConfigError("arma: |phi| < 1 and finite theta required");
    }
}

void GarchParams::validate() const {
    if (!(omega > 0.0) || !(alpha >= 0.0) || !(beta >= 0.0)) {
        throw ConfigError("garch: omega > 0, alpha >= 0, beta >= 0 required");
    }
    if (alpha + beta > 1.0) {
        throw ConfigError("garch: alpha + beta must not exceed 1");
    }
}

double GarchParams::initial_variance() const {
    const double persistence = alpha + beta;
    return persistence < 1.0 ? omega / (1.0 - persistence) : omega;
}

void EstarParams::validate() const {
    if (!std::isfinite(phi_low) || !std::isfinite(phi_high)) {
        throw ConfigError("estar: coefficients must be finite");
    }
}

std::string to_string(Setup setup) {
    switch (setup) {
        case Setup::IidIid: return "iid";
        case Setup::ArmaRespGarchNoise: return "arma-garch";
        case Setup::GarchRespArmaNoise: return "garch-arma";
        case Setup::EstarRespGarchNoise: return "estar-garch";
    }
    return "unknown";
}

Setup setup_from_string(const std::string& name) {
    if (name == "iid") return Setup::IidIid;
    if (name == "arma-garch") return Setup::ArmaRespGarchNoise;
    if (name == "garch-arma") return Setup::GarchRespArmaNoise;
    if (name == "estar-garch") return Setup::EstarRespGarchNoise;
    throw ConfigError("unknown setup '" + name + "' (expected iid, arma-garch, garch-arma, estar-garch)");
}

void GeneratorConfig::validate() const {
    burr.validate();
    if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
    if (!(rho_c >= 0.0 && rho_c < 1.0)) throw ConfigError("rho_c must lie in [0,1)");
    if (n < 25) throw ConfigError("n must be at least 25");
    if (p < 1) throw ConfigError("p must be at least 1");

    auto require = [this]<typename R, typename N>(const char* what) {
        if (!std::holds_alternative<R>(resp) || !std::holds_alternative<N>(noise)) {
            throw ConfigError(std::string("setup ") + to_string(setup) + " requires " + what);
        }
    };
    switch (setup) {
        case Setup::IidIid: {
            const bool resp_ok = std::holds_alternative<std::monostate>(resp) ||
                                 (std::holds_alternative<ArmaParams>(resp) &&
                                  std::get<ArmaParams>(resp).phi == 0.0 && std::get<ArmaParams>(resp).theta == 0.0);
            const bool noise_ok = std::holds_alternative<std::monostate>(noise) ||
                                  (std::holds_alternative<GarchParams>(noise) &&
                                   std::get<GarchParams>(noise).omega == 1.0 &&
                                   std::get<GarchParams>(noise).alpha == 0.0 &&
                                   std::get<GarchParams>(noise).beta == 0.0);
            if (!resp_ok || !noise_ok) {
                throw ConfigError("setup iid requires ARMA (0,0) response and GARCH (1,0,0) noise");
            }
            break;
        }
        case Setup::ArmaRespGarchNoise:
            require.template operator()<ArmaParams, GarchParams>("ARMA response and GARCH noise");
            std::get<ArmaParams>(resp).validate();
            std::get<GarchParams>(noise).validate();
            break;
        case Setup::GarchRespArmaNoise:
            require.template operator()<GarchParams, ArmaParams>("GARCH response and ARMA noise");
            std::get<GarchParams>(resp).validate();
            std::get<ArmaParams>(noise).validate();
            break;
        case Setup::EstarRespGarchNoise:
            require.template operator()<EstarParams, GarchParams>("ESTAR response and GARCH noise");
            std::get<EstarParams>(resp).validate();
            std::get<GarchParams>(noise).validate();
            break;
    }
}

double burr_sample(const BurrParams& params, double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("burr_sample: u must lie in (0,1)");
    if (!(params.gamma > 0.0) || !(params.rho < 0.0)) throw DomainError("burr_sample: gamma > 0 and rho < 0 required");
    // (1 + y^c)^{-1/gamma} = u  <=>  y^c = u^{-gamma} - 1
    const double power = std::expm1(-params.gamma * std::log(u));
    return std::pow(power, 1.0 / -params.rho);
}

double burr_survival(const BurrParams& params, double y) {
    if (y <= 0.0) return 1.0;
    return std::pow(1.0 + std::pow(y, -params.rho), -1.0 / params.gamma);
}

double burr_density(const BurrParams& params, double y) {
    if (y <= 0.0) return 0.0;
    const double c = -params.rho;
    const double k = 1.0 / params.gamma;
    const double yc = std::pow(y, c);
    return c * k * std::pow(y, c - 1.0) * std::pow(1.0 + yc, -k - 1.0);
}

std::vector<double> gen_arma(const ArmaParams& params, std::span<const double> innovations, std::size_t burn_in,
                             double y0, double eta0) {
    if (innovations.size() < burn_in) throw DomainError("gen_arma: fewer innovations than burn-in steps");
    std::vector<double> out;
    out.reserve(innovations.size() - burn_in);
    double y_prev = y0;
    double eta_prev = eta0;
    for (std::size_t i = 0; i < innovations.size(); ++i) {
        const double y = params.phi * y_prev + params.theta * eta_prev + innovations[i];
        if (i >= burn_in) out.push_back(y);
        y_prev = y;
        eta_prev = innovations[i];
    }
    return out;
}

GarchPath gen_garch(const GarchParams& params, std::span<const double> innovations, std::size_t burn_in) {
    if (innovations.size() < burn_in) throw DomainError("gen_garch: fewer innovations than burn-in steps");
    GarchPath path;
    path.eps.reserve(innovations.size() - burn_in);
    path.sigma2.reserve(innovations.size() - burn_in);
    double sigma2_prev = params.initial_variance();
    double eps_prev = 0.0;
    for (std::size_t i = 0; i < innovations.size(); ++i) {
        const double sigma2 = params.omega + params.alpha * eps_prev * eps_prev + params.beta * sigma2_prev;
        const double eps = std::sqrt(sigma2) * innovations[i];
        if (i >= burn_in) {
            path.eps.push_back(eps);
            path.sigma2.push_back(sigma2);
        }
        sigma2_prev = sigma2;
        eps_prev = eps;
    }
    return path;
}

std::vector<double> gen_estar(const EstarParams& params, std::span<const double> innovations, std::size_t burn_in,
                              double y0) {
    if (innovations.size() < burn_in) throw DomainError("gen_estar: fewer innovations than burn-in steps");
    std::vector<double> out;
    out.reserve(innovations.size() - burn_in);
    double y_prev = y0;
    for (std::size_t i = 0; i < innovations.size(); ++i) {
        const double transition = -std::expm1(-y_prev * y_prev);
        const double y = params.phi_low * y_prev + params.phi_high * y_prev * transition + innovations[i];
        if (i >= burn_in) out.push_back(y);
        y_prev = y;
    }
    return out;
}

Eigen::MatrixXd gen_toeplitz_gaussian(std::size_t n, std::size_t p, double rho_c, Rng& rng) {
    if (!(rho_c >= 0.0 && rho_c < 1.0)) throw DomainError("gen_toeplitz_gaussian: rho_c must lie in [0,1)");
    // The Cholesky factor of rho^{|j-l|} acts as an AR(1) recursion across columns.
    const double scale = std::sqrt(1.0 - rho_c * rho_c);
    Eigen::MatrixXd out(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        double prev = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double e = rng.normal();
            prev = j == 0 ? e : rho_c * prev + scale * e;
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = prev;
        }
    }
    return out;
}

Eigen::VectorXd beta_sine(std::size_t p) {
    if (p < 2) throw DomainError("beta_sine: p must be at least 2");
    Eigen::VectorXd beta(static_cast<Eigen::Index>(p));
    const double pd = static_cast<double>(p);
    for (std::size_t j = 1; j <= p; ++j) {
        // Exact zeros at multiples of a half turn.
        if ((2 * j) % p == 0) {
            beta(static_cast<Eigen::Index>(j - 1)) = 0.0;
            continue;
        }
        beta(static_cast<Eigen::Index>(j - 1)) = std::numbers::sqrt2 * std::sin(2.0 * std::numbers::pi * static_cast<double>(j) / pd);
    }
    return beta;
}

double link_g(double y, double kappa) { return std::pow(std::abs(y), kappa); }

namespace {

std::vector<double> simulate_response(const GeneratorConfig& config, Rng& rng) {
    const std::size_t total = config.n + config.burn_in;
    std::vector<double> eta(total);
    for (auto& e : eta) e = burr_sample(config.burr, rng.uniform_open());

    switch (config.setup) {
        case Setup::IidIid:
            return {eta.begin() + static_cast<std::ptrdiff_t>(config.burn_in), eta.end()};
        case Setup::ArmaRespGarchNoise:
            return gen_arma(std::get<ArmaParams>(config.resp), eta, config.burn_in);
        case Setup::GarchRespArmaNoise:
            return gen_garch(std::get<GarchParams>(config.resp), eta, config.burn_in).eps;
        case Setup::EstarRespGarchNoise:
            return gen_estar(std::get<EstarParams>(config.resp), eta, config.burn_in);
    }
    return {};
}

Eigen::MatrixXd simulate_noise(const GeneratorConfig& config, Rng& rng) {
    const std::size_t total = config.n + config.burn_in;
    const Eigen::MatrixXd innovations = gen_toeplitz_gaussian(total, config.p, config.rho_c, rng);
    Eigen::MatrixXd eps(static_cast<Eigen::Index>(config.n), static_cast<Eigen::Index>(config.p));

    std::vector<double> column(total);
    for (Eigen::Index j = 0; j < eps.cols(); ++j) {
        for (std::size_t i = 0; i < total; ++i) column[i] = innovations(static_cast<Eigen::Index>(i), j);
        std::vector<double> filtered;
        switch (config.setup) {
            case Setup::IidIid:
                filtered = gen_garch(GarchParams{1.0, 0.0, 0.0}, column, config.burn_in).eps;
                break;
            case Setup::GarchRespArmaNoise:
                filtered = gen_arma(std::get<ArmaParams>(config.noise), column, config.burn_in);
                break;
            case Setup::ArmaRespGarchNoise:
            case Setup::EstarRespGarchNoise:
                filtered = gen_garch(std::get<GarchParams>(config.noise), column, config.burn_in).eps;
                break;
        }
        for (std::size_t i = 0; i < config.n; ++i) eps(static_cast<Eigen::Index>(i), j) = filtered[i];
    }
    return eps;
}

}  // namespace

SampleSet assemble_sample(const GeneratorConfig& config) {
    config.validate();
    Rng base(config.seed);
    Rng resp_rng = base.split(0);
    Rng noise_rng = base.split(1);

    const std::vector<double> y = simulate_response(config, resp_rng);

    SampleSet sample;
    sample.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    sample.eps = simulate_noise(config, noise_rng);
    sample.beta_true = beta_sine(config.p);
    sample.g_values = sample.y.unaryExpr([&](double v) { return link_g(v, config.kappa); });

    sample.x.resize(sample.eps.rows(), sample.eps.cols());
    for (Eigen::Index i = 0; i < sample.x.rows(); ++i) {
        const double g = sample.g_values(i);
        sample.x.row(i) = g * sample.beta_true.transpose() + (g / 10.0) * sample.eps.row(i);
    }
    return sample;
}

}  // namespace epls
