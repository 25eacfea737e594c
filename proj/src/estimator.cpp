#include "epls/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epls/error.hpp"

namespace epls {

namespace {

void check_shapes(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda) {
    if (x.rows() != y.size() || lambda.rows() != x.rows() || lambda.cols() != x.cols()) {
        throw DataError("estimator: x, y and lambda dimensions disagree");
    }
}

}  // namespace

double tail_moment(std::span<const double> z, std::span<const double> y, double threshold) {
    if (z.size() != y.size()) throw DataError("tail_moment: z and y differ in length");
    if (z.empty()) throw DataError("tail_moment: empty sample");
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (y[i] >= threshold) sum += z[i];
    }
    return sum / static_cast<double>(z.size());
}

TailMoments tail_moments(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda,
                         double threshold) {
    check_shapes(x, y, lambda);
    if (y.size() == 0) throw DataError("tail_moments: empty sample");
    const Eigen::Index p = x.cols();
    TailMoments m;
    m.threshold = threshold;
    m.n = static_cast<std::size_t>(y.size());
    m.m_lambda = Eigen::VectorXd::Zero(p);
    m.m_lambda_x = Eigen::VectorXd::Zero(p);
    m.m_y_lambda_x = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!(y(i) >= threshold)) continue;
        ++m.n_exceed;
        m.m_y += y(i);
        for (Eigen::Index j = 0; j < p; ++j) {
            if (lambda(i, j) == 0.0) continue;
            m.m_lambda(j) += 1.0;
            m.m_lambda_x(j) += x(i, j);
            m.m_y_lambda_x(j) += y(i) * x(i, j);
        }
    }
    const double n = static_cast<double>(m.n);
    m.m_one = static_cast<double>(m.n_exceed) / n;
    m.m_y /= n;
    m.m_lambda /= n;
    m.m_lambda_x /= n;
    m.m_y_lambda_x /= n;
    return m;
}

EplsFit epls_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda, double threshold) {
    EplsFit fit;
    fit.moments = tail_moments(x, y, lambda, threshold);
    const TailMoments& m = fit.moments;
    if (m.n_exceed < 2) {
        throw InsufficientTailError("epls: fewer than 2 exceedances of threshold " + std::to_string(threshold));
    }
    const Eigen::Index p = x.cols();
    fit.v_hat = Eigen::VectorXd::Zero(p);
    fit.direction.method = "epls";
    fit.direction.threshold = threshold;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (m.m_lambda(j) == 0.0) {
            fit.direction.flagged.push_back(static_cast<std::size_t>(j));
            continue;
        }
        fit.v_hat(j) = (m.m_one * m.m_y_lambda_x(j) - m.m_y * m.m_lambda_x(j)) / m.m_lambda(j);
    }
    const double norm = fit.v_hat.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DegenerateError("epls: estimated direction has zero or non-finite norm");
    }
    fit.direction.beta_hat = fit.v_hat / norm;
    return fit;
}

Direction epls_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda,
                         double threshold) {
    return epls_fit(x, y, lambda, threshold).direction;
}

Direction epls_direction_at_k(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda,
                              std::size_t k) {
    Direction d = epls_direction(x, y, lambda, order_statistic_desc(y, k));
    d.k = k;
    return d;
}

Eigen::VectorXd epls_unmasked_v(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold) {
    if (x.rows() != y.size() || y.size() == 0) throw DataError("epls_unmasked_v: bad shapes");
    const double n = static_cast<double>(y.size());
    double m_one = 0.0;
    double m_y = 0.0;
    Eigen::VectorXd m_x = Eigen::VectorXd::Zero(x.cols());
    Eigen::VectorXd m_yx = Eigen::VectorXd::Zero(x.cols());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!(y(i) >= threshold)) continue;
        m_one += 1.0;
        m_y += y(i);
        m_x += x.row(i).transpose();
        m_yx += y(i) * x.row(i).transpose();
    }
    if (m_one < 2.0) throw InsufficientTailError("epls_unmasked_v: fewer than 2 exceedances");
    m_one /= n;
    m_y /= n;
    m_x /= n;
    m_yx /= n;
    return (m_one * m_yx - m_y * m_x) / m_one;
}

Eigen::VectorXd population_w(const Eigen::VectorXd& mes_xy, const Eigen::VectorXd& mes_x, double es_y) {
    if (mes_xy.size() != mes_x.size()) throw DataError("population_w: dimension mismatch");
    const Eigen::VectorXd v = mes_xy - mes_x * es_y;
    const double norm = v.norm();
    if (!(norm > 0.0)) throw DegenerateError("population_w: v(y) = 0");
    return v / norm;
}

std::vector<std::size_t> descending_order(const Eigen::VectorXd& y) {
    std::vector<std::size_t> order(static_cast<std::size_t>(y.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return y(static_cast<Eigen::Index>(a)) > y(static_cast<Eigen::Index>(b));
    });
    return order;
}

double order_statistic_desc(const Eigen::VectorXd& y, std::size_t k) {
    if (k < 1 || k > static_cast<std::size_t>(y.size())) throw DomainError("order statistic index out of range");
    std::vector<double> values(y.data(), y.data() + y.size());
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(values.begin(), nth, values.end(), std::greater<>());
    return *nth;
}

namespace {

// Covariance (1/k normalization) between y and the projections over `rows`.
double projected_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda,
                            const Eigen::VectorXd& direction, std::span<const std::size_t> rows) {
    double sum_yz = 0.0;
    double sum_y = 0.0;
    double sum_z = 0.0;
    for (std::size_t r : rows) {
        const auto i = static_cast<Eigen::Index>(r);
        double z = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (lambda(i, j) != 0.0) z += direction(j) * x(i, j);
        }
        sum_yz += y(i) * z;
        sum_y += y(i);
        sum_z += z;
    }
    const double k = static_cast<double>(rows.size());
    return sum_yz / k - (sum_y / k) * (sum_z / k);
}

}  // namespace

ThresholdSelection select_threshold(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda) {
    check_shapes(x, y, lambda);
    const auto n = static_cast<std::size_t>(y.size());
    if (n < 25) throw DomainError("select_threshold: need n >= 25");

    ThresholdSelection sel;
    sel.k_min = 5;
    sel.k_max = n / 5;
    sel.r_bar.assign(sel.k_max - sel.k_min + 1, std::numeric_limits<double>::quiet_NaN());

    const std::vector<std::size_t> order = descending_order(y);
    double best = -std::numeric_limits<double>::infinity();
    std::optional<Direction> best_direction;
    for (std::size_t k = sel.k_min; k <= sel.k_max; ++k) {
        const double threshold = y(static_cast<Eigen::Index>(order[k - 1]));
        Direction d;
        try {
            d = epls_direction(x, y, lambda, threshold);
        } catch (const DegenerateError&) {
            sel.skipped.push_back(k);
            continue;
        } catch (const InsufficientTailError&) {
            sel.skipped.push_back(k);
            continue;
        }
        const double r = projected_covariance(x, y, lambda, d.beta_hat, std::span(order).first(k));
        sel.r_bar[k - sel.k_min] = r;
        if (r > best) {
            best = r;
            sel.k_hat = k;
            d.k = k;
            best_direction = std::move(d);
        }
    }
    if (!best_direction) throw DegenerateError("select_threshold: direction undefined for every k");
    sel.threshold = best_direction->threshold;
    sel.direction = std::move(*best_direction);
    return sel;
}

double tail_projection_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const MaskMatrix& lambda,
                                  double threshold) {
    const Direction d = epls_direction(x, y, lambda, threshold);
    std::vector<std::size_t> rows;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) >= threshold) rows.push_back(static_cast<std::size_t>(i));
    }
    return projected_covariance(x, y, lambda, d.beta_hat, rows);
}

}  // namespace epls
