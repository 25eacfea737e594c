#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "epls/error.hpp"
#include "epls/montecarlo.hpp"

using namespace epls;

namespace {

PanelConfig small_panel(std::uint64_t seed) {
    PanelConfig c;
    c.id = "small";
    c.gen.n = 100;
    c.gen.p = 6;
    c.gen.burn_in = 20;
    c.gen.seed = seed;
    c.mask = {-0.1, 0.5, {}};
    return c;
}

}  // namespace

TEST_CASE("lower_quantile") {
    std::vector<double> v{5, 1, 4, 2, 3};
    CHECK(lower_quantile(v, 0.2) == 1);
    CHECK(lower_quantile(v, 0.5) == 3);
    CHECK(lower_quantile(v, 0.9) == 5);
    CHECK(lower_quantile(v, 1.0) == 5);
}

TEST_CASE("mask_response maps nonpositive values") {
    Eigen::VectorXd y(3);
    y << -1.0, 0.0, 2.0;
    const auto r = mask_response(y);
    CHECK(r[0] > 0.0);
    CHECK(r[1] > 0.0);
    CHECK(lambda_fn(r[0], -0.5) == 1.0);
    CHECK(r[2] == 2.0);
}

TEST_CASE("average_ranks") {
    CHECK(average_ranks({0.3}) == std::vector<double>{1.0});
    CHECK(average_ranks({2.0, 2.0}) == std::vector<double>{1.5, 1.5});
    CHECK(average_ranks({0.1, 0.9, 0.5, 0.9}) == std::vector<double>{4.0, 1.5, 3.0, 1.5});
}

TEST_CASE("method names round-trip") {
    for (Method m : all_methods()) CHECK(method_from_string(to_string(m)) == m);
    CHECK(all_methods().size() == 7);
    CHECK_THROWS((void)method_from_string("pls"));
}

TEST_CASE("catalog_panels") {
    const auto panels = catalog_panels(1);
    CHECK(panels.size() == 93);
    std::set<std::string> ids;
    int iid = 0;
    for (const auto& p : panels) {
        ids.insert(p.id);
        CHECK(p.gen.kappa == 0.5);
        CHECK_NOTHROW(p.gen.validate());
        CHECK_NOTHROW(p.mask.validate(p.gen.p));
        if (p.gen.setup == Setup::IidIid) ++iid;
    }
    CHECK(ids.size() == 93);
    CHECK(iid == 9);  // one scheme, a 3 x 3 grid of (gamma, tau)
    const auto again = catalog_panels(1, 300, 11);
    CHECK(again[40].gen.seed == panels[40].gen.seed);
    CHECK(again[40].gen.n == 300);
}

TEST_CASE("run_panel") {
    SUBCASE("one replication") {
        const auto r = run_panel(small_panel(3), 1);
        REQUIRE(r.reps == 1);
        REQUIRE(r.excluded == 0);
        CHECK(r.mean_beta == r.q05_beta);
        CHECK(r.mean_beta == r.q95_beta);
        CHECK(r.cosines.size() == 1);
        CHECK(r.mean_cosine == r.median_cosine);
    }
    SUBCASE("replay and job independence") {
        const auto a = run_panel(small_panel(8), 6, 1);
        const auto b = run_panel(small_panel(8), 6, 3);
        CHECK(a.mean_beta == b.mean_beta);
        CHECK(a.q05_beta == b.q05_beta);
        CHECK(a.cosines == b.cosines);
        CHECK(a.k_hat == b.k_hat);
        std::size_t hist = 0;
        for (auto [k, c] : a.k_hat_histogram) {
            CHECK(k >= 5);
            CHECK(k <= 20);
            hist += c;
        }
        CHECK(hist == a.cosines.size());
        CHECK(a.beta_true_unit.norm() == doctest::Approx(1.0));
    }
}

TEST_CASE("rank_methods") {
    TripletSettings ts;
    ts.count = 3;
    ts.n = 300;
    ts.seed = 5;
    const auto data = synthetic_triplets(ts);
    REQUIRE(data.size() == 3);
    CHECK(data[0].x.cols() == 2);

    RankSettings rs;
    rs.forest.n_trees = 10;
    rs.random_directions = 50;

    const auto single = rank_methods(data, {0.9, 0.95}, {Method::Epls}, rs);
    for (const auto& row : single.rows) CHECK(row.rank == 1.0);

    const auto table = rank_methods(data, {0.9}, all_methods(), rs);
    CHECK(table.rows.size() + table.skipped.size() == 21);
    double total = 0.0;
    for (const auto& m : table.mean_ranks) total += m.mean_rank;
    if (table.skipped.empty()) CHECK(total == doctest::Approx(28.0));

    rs.jobs = 3;
    const auto parallel = rank_methods(data, {0.9}, all_methods(), rs);
    REQUIRE(parallel.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) CHECK(parallel.rows[i].tailcov == table.rows[i].tailcov);
}

TEST_CASE("tailcov_curve") {
    TripletSettings ts;
    ts.count = 1;
    ts.n = 300;
    const auto data = synthetic_triplets(ts);
    RankSettings rs;
    rs.forest.n_trees = 5;
    rs.random_directions = 40;
    const auto curve = tailcov_curve(data[0], {20, 40, 60}, {Method::Epls, Method::Random}, rs);
    REQUIRE(curve.k.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(curve.random_min[i] <= curve.random_max[i]);
        CHECK(curve.threshold[i] > 0.0);
    }
    CHECK(curve.threshold[0] > curve.threshold[2]);
}
