#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "epls/error.hpp"
#include "epls/estimator.hpp"
#include "epls/gen.hpp"
#include "epls/mask.hpp"

using namespace epls;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

// Plain loop covariance over the top-k rows, used as an oracle.
double brute_cov(const Eigen::VectorXd& y, const Eigen::VectorXd& z, std::size_t k) {
    std::vector<std::pair<double, double>> pairs;
    for (Eigen::Index i = 0; i < y.size(); ++i) pairs.emplace_back(y(i), z(i));
    std::sort(pairs.begin(), pairs.end(), [](auto a, auto b) { return a.first > b.first; });
    double my = 0, mz = 0;
    for (std::size_t i = 0; i < k; ++i) {
        my += pairs[i].first;
        mz += pairs[i].second;
    }
    my /= static_cast<double>(k);
    mz /= static_cast<double>(k);
    double c = 0;
    for (std::size_t i = 0; i < k; ++i) c += (pairs[i].first - my) * (pairs[i].second - mz);
    return c / static_cast<double>(k);
}

}  // namespace

TEST_CASE("tail_moment") {
    std::vector<double> z{1, 2, 3}, y{1, 2, 3};
    CHECK(tail_moment(z, y, 2.0) == doctest::Approx(5.0 / 3.0));
    CHECK(tail_moment(z, y, 0.5) == doctest::Approx(2.0));
    CHECK(tail_moment(z, y, 3.5) == 0.0);
    std::vector<double> short_y{1, 2};
    CHECK_THROWS_AS((void)tail_moment(z, short_y, 1.0), DataError);
}

TEST_CASE("epls on the hand dataset") {
    Eigen::MatrixXd x(4, 1);
    x << 1, 1, 2, 6;
    const Eigen::VectorXd y = vec({1, 2, 3, 4});
    Eigen::MatrixXd lambda(4, 1);
    lambda << 1, 0, 1, 1;
    const auto fit = epls_fit(x, y, lambda, 2.5);
    CHECK(fit.moments.m_one == 0.5);
    CHECK(fit.moments.m_y == 1.75);
    CHECK(fit.moments.m_lambda(0) == 0.5);
    CHECK(fit.moments.m_lambda_x(0) == 2.0);
    CHECK(fit.moments.m_y_lambda_x(0) == 7.5);
    CHECK(std::abs(fit.v_hat(0) - 0.5) < 1e-12);
    CHECK(fit.direction.beta_hat(0) == 1.0);

    // masked entries are never read
    x(1, 0) = 1e300;
    CHECK(std::abs(epls_fit(x, y, lambda, 2.5).v_hat(0) - 0.5) < 1e-12);
}

TEST_CASE("epls recovers the index of noiseless data") {
    Rng rng(4);
    const Eigen::Index n = 300;
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = burr_sample({0.3, -1.0}, rng.uniform_open());
    const Eigen::Vector2d beta(0.6, 0.8);
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) = std::sqrt(y(i)) * beta.transpose();
    const auto d = epls_direction(x, y, Eigen::MatrixXd::Ones(n, 2), order_statistic_desc(y, 30));
    CHECK(std::abs(std::abs(d.beta_hat.dot(beta)) - 1.0) < 1e-10);
    CHECK(std::abs(d.beta_hat(0) - 0.6) < 1e-10);
}

TEST_CASE("unit mask reproduces the unmasked formula") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const Eigen::Index n = 60, p = 4;
        Eigen::VectorXd y(n);
        Eigen::MatrixXd x(n, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            y(i) = rng.normal();
            for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal() + y(i);
        }
        const double t = order_statistic_desc(y, 15);
        const auto masked = epls_fit(x, y, Eigen::MatrixXd::Ones(n, p), t).v_hat;
        const auto plain = epls_unmasked_v(x, y, t);
        CHECK((masked - plain).cwiseAbs().maxCoeff() < 1e-12);

        // scale equivariance
        const auto scaled = epls_direction(3.0 * x, y, Eigen::MatrixXd::Ones(n, p), t).beta_hat;
        CHECK((scaled - epls_direction(x, y, Eigen::MatrixXd::Ones(n, p), t).beta_hat).norm() < 1e-12);
    }
}

TEST_CASE("epls edge cases") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 5, 2, 6, 3, 7, 4, 9;
    const Eigen::VectorXd y = vec({1, 2, 3, 4});
    Eigen::MatrixXd lambda = Eigen::MatrixXd::Ones(4, 2);
    lambda(2, 1) = 0;
    lambda(3, 1) = 0;
    const auto d = epls_direction(x, y, lambda, 3.0);
    REQUIRE(d.flagged.size() == 1);
    CHECK(d.flagged[0] == 1);
    CHECK(d.beta_hat(1) == 0.0);
    CHECK(d.beta_hat(0) == 1.0);

    CHECK_THROWS_AS((void)epls_direction(x, y, Eigen::MatrixXd::Ones(4, 2), 4.0), InsufficientTailError);
    Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(4, 2);
    CHECK_THROWS_AS((void)epls_direction(flat, y, Eigen::MatrixXd::Ones(4, 2), 2.0), DegenerateError);
    CHECK_THROWS_AS((void)epls_direction(x, vec({1, 2, 3}), Eigen::MatrixXd::Ones(4, 2), 2.0), DataError);
}

TEST_CASE("population_w") {
    const auto w = population_w(Eigen::Vector2d(2, 0), Eigen::Vector2d(1, 0), 1.0);
    CHECK(w(0) == 1.0);
    CHECK(w(1) == 0.0);
    CHECK_THROWS_AS((void)population_w(Eigen::Vector2d(2, 4), Eigen::Vector2d(1, 2), 2.0), DegenerateError);
}

TEST_CASE("order statistics") {
    const Eigen::VectorXd y = vec({3, 9, 1, 9, 4});
    CHECK(order_statistic_desc(y, 1) == 9);
    CHECK(order_statistic_desc(y, 3) == 4);
    CHECK(order_statistic_desc(y, 5) == 1);
    CHECK_THROWS_AS((void)order_statistic_desc(y, 0), DomainError);
    CHECK(descending_order(y) == std::vector<std::size_t>{1, 3, 4, 0, 2});
}

TEST_CASE("select_threshold") {
    GeneratorConfig cfg;
    cfg.n = 200;
    cfg.p = 5;
    cfg.seed = 17;
    cfg.burn_in = 0;
    const auto s = assemble_sample(cfg);
    Rng mrng(18);
    std::vector<double> yv(s.y.data(), s.y.data() + s.y.size());
    const auto lambda = gen_bar_mask(yv, cfg.p, {-0.1, 0.5, {}}, mrng);
    const auto sel = select_threshold(s.x, s.y, lambda);

    CHECK(sel.k_min == 5);
    CHECK(sel.k_max == 40);
    CHECK(sel.k_hat >= 5);
    CHECK(sel.k_hat <= 40);
    REQUIRE(sel.r_bar.size() == 36);
    CHECK(sel.threshold == order_statistic_desc(s.y, sel.k_hat));
    const double best = *std::max_element(sel.r_bar.begin(), sel.r_bar.end());
    CHECK(sel.r_bar[sel.k_hat - 5] == best);

    for (std::size_t k : {5u, 12u, 40u}) {
        const auto d = epls_direction_at_k(s.x, s.y, lambda, k);
        const Eigen::VectorXd z = lambda.cwiseProduct(s.x) * d.beta_hat;
        CHECK(sel.r_bar[k - 5] == doctest::Approx(brute_cov(s.y, z, k)).epsilon(1e-12));
    }

    CHECK_THROWS_AS((void)select_threshold(s.x.topRows(20), s.y.head(20), lambda.topRows(20)), DomainError);
}
