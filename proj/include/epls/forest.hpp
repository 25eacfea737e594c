#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace epls {

struct ForestSettings {
    std::size_t n_trees = 100;
    std::optional<std::size_t> max_depth;  // unlimited when empty
    std::size_t min_leaf = 1;
    bool bootstrap = true;
    std::size_t max_features = 0;  // 0 means every feature at every split
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

struct ForestFit {
    /// Mean over trees of the per-tree importances normalized to sum 1, then
    /// renormalized; zero when no tree ever split.
    Eigen::VectorXd importance;
    /// Mean over trees of the raw weighted Gini decrease
    /// sum_t (N_t g_t - N_L g_L - N_R g_R) / N per feature.
    Eigen::VectorXd raw_importance;
    std::size_t n_splits = 0;
};

/// Binary classification forest with Gini impurity; only the impurity-based
/// feature importances are kept. Rows of `x` are observations.
[[nodiscard]] ForestFit fit_forest_importance(const Eigen::MatrixXd& x, const std::vector<bool>& labels,
                                              const ForestSettings& settings);

}  // namespace epls
