#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epls/mask.hpp"

namespace epls {

/// Empirical tail moments m_Z(t) = (1/n) sum_i Z_i 1{Y_i >= t} for the
/// quantities entering the masked estimator.
struct TailMoments {
    double threshold = 0.0;
    std::size_t n = 0;
    std::size_t n_exceed = 0;
    double m_one = 0.0;  // empirical survival function
    double m_y = 0.0;
    Eigen::VectorXd m_lambda;
    Eigen::VectorXd m_lambda_x;
    Eigen::VectorXd m_y_lambda_x;
};

/// A unit-norm direction estimate produced by any of the methods.
struct Direction {
    std::string method;
    Eigen::VectorXd beta_hat;
    double threshold = std::numeric_limits<double>::quiet_NaN();
    std::optional<std::size_t> k;
    std::optional<double> tail_cov;
    /// Coordinates whose estimate was forced to zero (no observed tail data).
    std::vector<std::size_t> flagged;
    /// Set when a singular covariance forced a pseudo-inverse.
    bool pinv_fallback = false;
};

struct EplsFit {
    TailMoments moments;
    Eigen::VectorXd v_hat;
    Direction direction;
};

/// (1/n) sum_i z_i 1{y_i >= threshold}; 0 when nothing exceeds.
[[nodiscard]] double tail_moment(std::span<const double> z, std::span<const double> y, double threshold);

[[nodiscard]] TailMoments tail_moments(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda,
                                       double threshold);

/// Masked EPLS estimate at a fixed threshold (weak exceedance Y >= threshold).
///
/// v_j = (m_1 m_{Y Lambda_j X_j} - m_Y m_{Lambda_j X_j}) / m_{Lambda_j}. Coordinates with
/// m_{Lambda_j} = 0 get v_j = 0 and are listed in Direction::flagged. Only the
/// product Lambda (.) X is read, so `x` may hold arbitrary values where masked.
///
/// Throws InsufficientTailError with fewer than 2 exceedances and
/// DegenerateError when v_hat = 0.
[[nodiscard]] EplsFit epls_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda,
                               double threshold);

[[nodiscard]] Direction epls_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda,
                                       double threshold);

/// Same estimator with the threshold set to the k-th largest response.
[[nodiscard]] Direction epls_direction_at_k(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                            const MaskMatrix& lambda, std::size_t k);

/// Fully observed estimator (m_1 m_{YX} - m_Y m_X) / m_1, kept as an
/// independent path for checking the masked one.
[[nodiscard]] Eigen::VectorXd epls_unmasked_v(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold);

/// w = v / |v| with v = MES_XY - MES_X ES_Y.
[[nodiscard]] Eigen::VectorXd population_w(const Eigen::VectorXd& mes_xy, const Eigen::VectorXd& mes_x, double es_y);

/// k-th largest entry (k = 1 is the maximum), i.e. Y_{n-k+1,n}.
[[nodiscard]] double order_statistic_desc(const Eigen::VectorXd& y, std::size_t k);

/// Indices sorting y in decreasing order; equal values keep index order.
[[nodiscard]] std::vector<std::size_t> descending_order(const Eigen::VectorXd& y);

struct ThresholdSelection {
    std::size_t k_hat = 0;
    double threshold = 0.0;
    std::size_t k_min = 0;
    std::size_t k_max = 0;
    /// r_bar[k - k_min]; NaN where the direction was undefined.
    std::vector<double> r_bar;
    std::vector<std::size_t> skipped;
    Direction direction;
};

/// Grid search of k in [5, floor(n/5)] maximizing the empirical covariance
/// between the top-k responses and the projections of their concomitants on
/// the direction estimated at Y_{n-k+1,n}. Ties go to the smallest k.
[[nodiscard]] ThresholdSelection select_threshold(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                  const MaskMatrix& lambda);

/// r_bar evaluated at a continuous threshold: covariance over {Y_i >= t}
/// between Y and the projection of Lambda (.) X on the direction estimated at t.
[[nodiscard]] double tail_projection_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                const MaskMatrix& lambda, double threshold);

}  // namespace epls
