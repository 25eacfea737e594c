#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "epls/error.hpp"
#include "epls/tailstats.hpp"

using namespace epls;

TEST_CASE("hill_curve") {
    std::vector<double> y{1, 2, 4};
    const auto h = hill_curve(y, 2);
    CHECK(h[0] == doctest::Approx(std::numbers::ln2));
    CHECK(h[1] == doctest::Approx(1.5 * std::numbers::ln2));

    const std::size_t n = 1000;
    std::vector<double> pareto(n);
    for (std::size_t i = 0; i < n; ++i) pareto[i] = std::pow(static_cast<double>(i + 1) / (n + 1), -0.5);
    const auto hp = hill_curve(pareto, 400);
    std::vector<double> sorted = pareto;
    std::sort(sorted.rbegin(), sorted.rend());
    for (std::size_t k : {1u, 17u, 200u, 400u}) {
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) acc += std::log(sorted[i]);
        CHECK(std::abs(hp[k - 1] - (acc / k - std::log(sorted[k]))) < 1e-12);
    }

    std::vector<double> scaled = pareto;
    for (auto& v : scaled) v *= 7.5;
    const auto hs = hill_curve(scaled, 400);
    for (std::size_t k = 0; k < hs.size(); ++k) CHECK(std::abs(hs[k] - hp[k]) < 1e-12);

    std::vector<double> constant(50, 3.0);
    for (double v : hill_curve(constant, 20)) CHECK(v == 0.0);

    std::vector<double> nonpos{5, 4, 0, -1};
    CHECK_THROWS((void)hill_curve(nonpos, 2));
    CHECK_THROWS((void)hill_curve(y, 3));
}

TEST_CASE("detect_plateau") {
    std::vector<double> flat(100, 0.5);
    PlateauSettings s;
    const auto p = detect_plateau(flat, s);
    REQUIRE(p);
    CHECK(p->k_start == 1);
    CHECK(p->k_end == 100);
    CHECK(p->gamma_mean == doctest::Approx(0.5));

    std::vector<double> line(100);
    for (std::size_t i = 0; i < line.size(); ++i) line[i] = 0.3 + 0.01 * static_cast<double>(i);
    CHECK(!detect_plateau(line, s));

    std::vector<double> low(100, 0.1);
    CHECK(!detect_plateau(low, s));

    // a flat stretch in the middle of noise is found and delimited
    std::vector<double> mixed(120);
    for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] = (i % 2 == 0) ? 0.1 : 1.5;
    for (std::size_t i = 40; i < 80; ++i) mixed[i] = 0.6;
    const auto m = detect_plateau(mixed, s);
    REQUIRE(m);
    CHECK(m->k_start == 41);
    CHECK(m->k_end == 80);
    CHECK(m->gamma_mean == doctest::Approx(0.6));

    CHECK(PlateauSettings::defaults_for(200).window == 60);
    CHECK(PlateauSettings::defaults_for(20).window == 10);
}

TEST_CASE("hill_diagnostics on a Pareto sample") {
    std::vector<double> y(4000);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::pow(static_cast<double>(i + 1) / 4001.0, -0.5);
    y.push_back(-3.0);
    const auto d = hill_diagnostics(y);
    CHECK(d.hill.size() == 2000);
    REQUIRE(d.plateau);
    CHECK(d.plateau->gamma_mean == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("tail_covariance") {
    std::vector<double> score{9, 1, 2, 3}, y{0, 2, 4, 6};
    CHECK(tail_covariance(score, y, 1.0) == doctest::Approx(2.0));
    std::vector<double> same{0, 2, 4, 6};
    CHECK(tail_covariance(same, y, 1.0) == doctest::Approx(4.0));
    std::vector<double> constant{5, 5, 5, 5};
    CHECK(tail_covariance(constant, y, 1.0) == 0.0);
    // strict exceedance: y = 2 is not in the tail at threshold 2
    CHECK(tail_covariance(score, y, 2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)tail_covariance(score, y, 4.0), InsufficientTailError);
}

TEST_CASE("burr_moments") {
    const auto m = burr_moments({0.1, -1.0});
    CHECK(m.mean == doctest::Approx(1.0 / 9.0).epsilon(1e-8));
    CHECK(m.variance == doctest::Approx(0.0154321).epsilon(1e-5));
    CHECK_THROWS_AS((void)burr_moments({0.5, -1.0}), DomainError);
}

TEST_CASE("garch tail index degenerate cases") {
    TailIndexSettings s;
    s.mc_samples = 10000;
    const auto arch_free = garch_tail_index({0.05, 0.0, 0.9}, {0.1, -1.0}, s);
    CHECK(!arch_free.converged);
    CHECK(!arch_free.report.empty());
    const auto infinite = garch_tail_index({0.05, 0.1, 0.85}, {0.5, -1.0}, s);
    CHECK(!infinite.converged);
}

TEST_CASE("garch_log_moment is negative for a stationary GARCH") {
    const auto e = garch_log_moment({0.05, 0.1, 0.85}, InnovationLaw::Normal, {}, 200000);
    CHECK(e.mean < 0.0);
    CHECK(e.std_error > 0.0);
    CHECK(e.std_error < 1e-3);
}
