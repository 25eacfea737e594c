#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "epls/rng.hpp"

namespace epls {

inline constexpr std::size_t kDefaultBurnIn = 500;

/// Burr XII law with shape parameters c = -rho and k = 1/gamma:
///
///     P(Y >= y) = (1 + y^{-rho})^{-1/gamma},  y >= 0.
///
/// The tail index is gamma / (-rho), which equals gamma for rho = -1.
struct BurrParams {
    double gamma = 0.1;
    double rho = -1.0;

    /// Enforces 0 < gamma < 1 and rho < 0.
    void validate() const;
};

struct ArmaParams {
    double phi = 0.0;
    double theta = 0.0;
    void validate() const;
};

struct GarchParams {
    double omega = 1.0;
    double alpha = 0.0;
    double beta = 0.0;

    /// omega > 0, alpha >= 0, beta >= 0, alpha + beta <= 1.
    void validate() const;
    [[nodiscard]] bool near_integrated() const { return alpha + beta >= 0.99; }
    [[nodiscard]] double initial_variance() const;
};

struct EstarParams {
    double phi_low = 0.2;
    double phi_high = 0.95;
    void validate() const;
};

enum class Setup {
    IidIid,
    ArmaRespGarchNoise,
    GarchRespArmaNoise,
    EstarRespGarchNoise,
};

[[nodiscard]] std::string to_string(Setup setup);
[[nodiscard]] Setup setup_from_string(const std::string& name);

using Dynamics = std::variant<std::monostate, ArmaParams, GarchParams, EstarParams>;

struct GeneratorConfig {
    Setup setup = Setup::IidIid;
    BurrParams burr;
    double kappa = 0.5;
    Dynamics resp;
    Dynamics noise;
    double rho_c = 0.8;
    std::size_t n = 500;
    std::size_t p = 101;
    std::uint64_t seed = 0;
    std::size_t burn_in = kDefaultBurnIn;

    /// Throws ConfigError when the dynamics do not match the setup.
    void validate() const;
};

/// One simulated dataset under X = g(Y) beta + (g(Y)/10) eps.
struct SampleSet {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    Eigen::MatrixXd eps;
    Eigen::VectorXd beta_true;
    Eigen::VectorXd g_values;
};

/// Inverse-survival sampling: returns y with P(Y >= y) = u.
[[nodiscard]] double burr_sample(const BurrParams& params, double u);
[[nodiscard]] double burr_survival(const BurrParams& params, double y);
[[nodiscard]] double burr_density(const BurrParams& params, double y);

/// ARMA(1,1): Y_i = phi Y_{i-1} + theta eta_{i-1} + eta_i. The first
/// `burn_in` outputs are discarded.
[[nodiscard]] std::vector<double> gen_arma(const ArmaParams& params, std::span<const double> innovations,
                                           std::size_t burn_in = kDefaultBurnIn, double y0 = 0.0,
                                           double eta0 = 0.0);

struct GarchPath {
    std::vector<double> eps;
    std::vector<double> sigma2;
};

/// GARCH(1,1): sigma2_i = omega + alpha eps_{i-1}^2 + beta sigma2_{i-1},
/// eps_i = sqrt(sigma2_i) eta_i. Starts from sigma2_0 = initial_variance()
/// and eps_0 = 0.
[[nodiscard]] GarchPath gen_garch(const GarchParams& params, std::span<const double> innovations,
                                  std::size_t burn_in = kDefaultBurnIn);

/// ESTAR(1): Y_i = phi_low Y_{i-1} + phi_high Y_{i-1} (1 - exp(-Y_{i-1}^2)) + eta_i.
[[nodiscard]] std::vector<double> gen_estar(const EstarParams& params, std::span<const double> innovations,
                                            std::size_t burn_in = kDefaultBurnIn, double y0 = 0.0);

/// n x p matrix of i.i.d. rows, each N(0, T) with T_{jl} = rho_c^{|j-l|}.
[[nodiscard]] Eigen::MatrixXd gen_toeplitz_gaussian(std::size_t n, std::size_t p, double rho_c, Rng& rng);

/// beta_j = sqrt(2) sin(2 pi j / p), j = 1..p.
[[nodiscard]] Eigen::VectorXd beta_sine(std::size_t p);

/// Link g(y) = |y|^kappa.
[[nodiscard]] double link_g(double y, double kappa);

[[nodiscard]] SampleSet assemble_sample(const GeneratorConfig& config);

}  // namespace epls
