#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "epls/estimator.hpp"
#include "epls/forest.hpp"
#include "epls/rng.hpp"

namespace epls {

/// Slice labels 0..H-1 for equal-frequency slicing of `values`: the r-th
/// smallest value (0-based) goes to slice floor(r H / n), and a run of equal
/// values is moved into the lowest slice it touches. Upper slices may end up
/// empty when ties are heavy.
[[nodiscard]] std::vector<std::size_t> equal_frequency_slices(std::span<const double> values, std::size_t h);

struct SliceSummary {
    Eigen::MatrixXd slice_means;  // p x H_nonempty
    std::vector<std::size_t> counts;
    std::vector<std::size_t> slice_ids;  // original label of each kept slice
    std::size_t total = 0;
};

/// Means of the rows of `x` per nonempty slice.
[[nodiscard]] SliceSummary summarize_slices(const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels,
                                            std::size_t h);

/// Flips v so that its first nonzero coordinate is positive.
void apply_sign_convention(Eigen::VectorXd& v);

/// Rows of x and entries of y with y > threshold.
struct TailSample {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};
[[nodiscard]] TailSample tail_sample(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold);

/// Leading eigenvector of the tail covariance of X over {Y > threshold}.
[[nodiscard]] Direction epca_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold);

/// normalize(Sigma_y^+ Delta) with Delta = mu_K - mean(mu_1..mu_{K-1}) over K
/// equal-frequency slices of the tail severities Y - threshold.
[[nodiscard]] Direction elda_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold,
                                       std::size_t k = 5);

struct SirSettings {
    std::size_t slices = 10;
    bool allow_pinv = true;
};

/// Leading eigenvector of Sigma_XX^{-1} Sigma_B over equal-frequency slices of Y.
[[nodiscard]] Direction sir_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      const SirSettings& settings = {});

/// sir_direction on the strict exceedances {Y > threshold}.
[[nodiscard]] Direction esir_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold,
                                       const SirSettings& settings = {});

/// iota / |iota| from a forest classifying 1{Y >= threshold} over all rows.
[[nodiscard]] Direction erf_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold,
                                      const ForestSettings& settings = {});

struct RandomDirections {
    Eigen::VectorXd mean;        // not renormalized
    Eigen::MatrixXd directions;  // p x m, unit columns
};

[[nodiscard]] RandomDirections random_directions(std::size_t p, std::size_t m, Rng& rng);

}  // namespace epls
