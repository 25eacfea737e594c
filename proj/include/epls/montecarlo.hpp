#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epls/competitors.hpp"
#include "epls/gen.hpp"
#include "epls/mask.hpp"

namespace epls {

struct PanelConfig {
    std::string id;
    int figure = 0;
    GeneratorConfig gen;
    MaskConfig mask;
};

struct PanelResult {
    PanelConfig config;
    std::size_t reps = 0;
    std::size_t excluded = 0;
    std::vector<std::string> exclusion_reasons;
    Eigen::VectorXd beta_true;
    Eigen::VectorXd beta_true_unit;
    Eigen::VectorXd mean_beta;
    Eigen::VectorXd q05_beta;
    Eigen::VectorXd q95_beta;
    std::vector<double> cosines;  // kept replications, in replication order
    std::vector<std::size_t> k_hat;
    double mean_cosine = 0.0;
    double median_cosine = 0.0;
    std::map<std::size_t, std::size_t> k_hat_histogram;
};

/// Order statistic Y_{ceil(alpha n), n} (1-based), the "lower" convention.
[[nodiscard]] double lower_quantile(std::vector<double> values, double alpha);

/// Positive stand-in for responses fed to the mask: nonpositive values map to
/// the smallest positive double, so they are observed with probability 1.
[[nodiscard]] std::vector<double> mask_response(const Eigen::VectorXd& y);

/// Replication r uses generator seed split_seed(config.gen.seed, r). Failed
/// replications are excluded and counted; when all fail the aggregates are NaN.
[[nodiscard]] PanelResult run_panel(const PanelConfig& config, std::size_t reps, std::size_t jobs = 1);

/// The 93 simulation panels; each panel's seed is split from `base_seed` by a
/// hash of its id, so selecting a subset does not change the others.
[[nodiscard]] std::vector<PanelConfig> catalog_panels(std::uint64_t base_seed = 0, std::size_t n = 500,
                                                      std::size_t p = 101);

[[nodiscard]] std::uint64_t fnv1a64(std::string_view text) noexcept;

enum class Method { Epls, Epca, Elda, Sir, Esir, Erf, Random };

[[nodiscard]] std::string to_string(Method m);
[[nodiscard]] Method method_from_string(const std::string& s);
[[nodiscard]] std::vector<Method> all_methods();

/// One (Y, X) dataset for the ranking harness. Entries of x where lambda = 0
/// are ignored; competitors and scores see the zero-filled product.
struct RankDataset {
    std::string name;
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    MaskMatrix lambda;
};

struct RankSettings {
    ForestSettings forest;
    std::size_t random_directions = 500;
    std::size_t elda_slices = 5;
    SirSettings sir;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct RankRow {
    std::string dataset;
    double alpha = 0.0;
    Method method = Method::Epls;
    double tailcov = 0.0;
    double rank = 0.0;
};

struct MeanRank {
    Method method = Method::Epls;
    double alpha = 0.0;
    double mean_rank = 0.0;
    std::size_t count = 0;
};

struct RankTable {
    std::vector<RankRow> rows;
    std::vector<MeanRank> mean_ranks;
    std::vector<std::string> skipped;
};

/// Ranks 1..M in decreasing order of score; ties share their average rank.
[[nodiscard]] std::vector<double> average_ranks(const std::vector<double>& scores);

/// Direction of one method at a threshold; the random method returns the
/// (unnormalized) mean of the sampled directions.
[[nodiscard]] Eigen::VectorXd method_direction(Method m, const RankDataset& data, double threshold,
                                               const RankSettings& settings, std::uint64_t seed);

[[nodiscard]] RankTable rank_methods(const std::vector<RankDataset>& datasets, const std::vector<double>& alphas,
                                     const std::vector<Method>& methods, const RankSettings& settings);

struct TripletSettings {
    std::size_t count = 20;
    std::size_t n = 600;
    double gamma = 0.3;
    double tau = -0.1;
    double alpha_bar = 0.5;
    std::uint64_t seed = 0;
};

/// Heavy-tailed single-index datasets with p = 2: X = g(Y) beta + correlated
/// Gaussian noise, with BAR masks on both coordinates.
[[nodiscard]] std::vector<RankDataset> synthetic_triplets(const TripletSettings& settings);

struct TailCovCurve {
    std::vector<std::size_t> k;
    std::vector<double> threshold;
    std::map<Method, std::vector<double>> methods;  // NaN where undefined
    std::vector<double> random_min;
    std::vector<double> random_max;
};

/// Tail covariance against the threshold Y_{n-k+1,n} for each method, with
/// the range over the individual random directions.
[[nodiscard]] TailCovCurve tailcov_curve(const RankDataset& data, const std::vector<std::size_t>& ks,
                                         const std::vector<Method>& methods, const RankSettings& settings);

}  // namespace epls
