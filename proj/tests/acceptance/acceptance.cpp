// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../support.hpp"
#include "epls/cli.hpp"
#include "epls/error.hpp"
#include "epls/estimator.hpp"
#include "epls/gen.hpp"
#include "epls/ghcn.hpp"
#include "epls/io.hpp"
#include "epls/mask.hpp"
#include "epls/montecarlo.hpp"
#include "epls/tailstats.hpp"

namespace fs = std::filesystem;
using namespace epls;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// ---- 1 ---------------------------------------------------------------------

Outcome mask_marginal() {
    Rng yr(2024);
    std::vector<double> y(200);
    for (auto& v : y) v = burr_sample({0.4, -1.0}, yr.uniform_open());
    const MaskConfig cfg{-0.5, 0.5, {}};
    const int draws = 100'000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(200);
    Rng rng(77);
    for (int d = 0; d < draws; ++d) sum += gen_bar_mask(y, 1, cfg, rng).col(0);
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double err = std::abs(sum(static_cast<Eigen::Index>(i)) / draws - lambda_fn(y[i], cfg.tau));
        worst = std::max(worst, err);
    }
    return {worst <= 0.01, "max |mean(Lambda_i) - p_i| = " + fmt(worst)};
}

// ---- 2 ---------------------------------------------------------------------

// Covariance of (w . x_i, y_i) over the rows with y_i >= t, computed directly.
double tail_cov_of(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double t, const Eigen::VectorXd& w) {
    double sz = 0, sy = 0, szy = 0, count = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!(y(i) >= t)) continue;
        const double z = x.row(i).dot(w);
        sz += z;
        sy += y(i);
        szy += z * y(i);
        count += 1;
    }
    return szy / count - (sz / count) * (sy / count);
}

Outcome proposition_one() {
    GeneratorConfig cfg;
    cfg.n = 2000;
    cfg.p = 3;
    cfg.seed = 31;
    const SampleSet s = assemble_sample(cfg);
    Eigen::MatrixXd noiseless(s.x.rows(), s.x.cols());
    for (Eigen::Index i = 0; i < s.x.rows(); ++i) noiseless.row(i) = s.g_values(i) * s.beta_true.transpose();

    const double t = order_statistic_desc(s.y, 200);
    double worst = -std::numeric_limits<double>::infinity();
    const std::array<const Eigen::MatrixXd*, 2> designs{&noiseless, &s.x};
    for (const Eigen::MatrixXd* x : designs) {
        Eigen::VectorXd mes_xy = Eigen::VectorXd::Zero(3), mes_x = Eigen::VectorXd::Zero(3);
        double es_y = 0, count = 0;
        for (Eigen::Index i = 0; i < s.y.size(); ++i) {
            if (!(s.y(i) >= t)) continue;
            mes_xy += s.y(i) * x->row(i).transpose();
            mes_x += x->row(i).transpose();
            es_y += s.y(i);
            count += 1;
        }
        const Eigen::VectorXd w = population_w(mes_xy / count, mes_x / count, es_y / count);
        const double at_w = tail_cov_of(*x, s.y, t, w);
        Rng rng(5);
        for (int r = 0; r < 10'000; ++r) {
            Eigen::VectorXd v(3);
            for (auto& c : v) c = rng.normal();
            v.normalize();
            worst = std::max(worst, (tail_cov_of(*x, s.y, t, v) - at_w) / std::abs(at_w));
        }
    }
    return {worst <= 1e-9, "largest relative excess over w: " + fmt(worst)};
}

// ---- 3 ---------------------------------------------------------------------

Outcome garch_tail() {
    const GarchParams standard{0.05, 0.1, 0.85};
    const GarchParams igarch{0.05, 0.05, 0.94};
    struct Case {
        GarchParams g;
        double gamma;
        double target;
    };
    const std::vector<Case> cases{{standard, 0.1, 0.28}, {igarch, 0.1, 0.31}, {standard, 0.4, 0.43}, {igarch, 0.4, 0.45}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto r = garch_tail_index(c.g, {c.gamma, -1.0});
        const bool hit = r.converged && std::abs(r.gamma_g - c.target) <= 0.03;
        ok = ok && hit;
        detail += "g=" + fmt(c.gamma, 2) + "/b=" + fmt(c.g.beta, 2) + ": " + fmt(r.gamma_g) + " (target " +
                  fmt(c.target, 2) + ") ";
    }
    for (const auto& g : {standard, igarch}) {
        const auto r = garch_tail_index(g, {0.5, -1.0});
        ok = ok && !r.converged && !r.report.empty();
        detail += "g=0.5: " + std::string(r.converged ? "converged" : "fails") + " ";
    }
    return {ok, detail};
}

// ---- 4 ---------------------------------------------------------------------

Outcome hill_plateau() {
    int hits = 0;
    std::string means;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(split_seed(4242, seed));
        std::vector<double> y(5000);
        for (auto& v : y) v = std::pow(rng.uniform_open(), -0.5);
        const auto d = hill_diagnostics(y);
        if (d.plateau && d.plateau->gamma_mean >= 0.45 && d.plateau->gamma_mean <= 0.55) ++hits;
        means += d.plateau ? fmt(d.plateau->gamma_mean, 3) + " " : "none ";
    }
    return {hits >= 18, std::to_string(hits) + "/20 plateaus in [0.45, 0.55]; means " + means};
}

// ---- 5 ---------------------------------------------------------------------

Outcome epls_oracle() {
    Eigen::MatrixXd x(4, 1);
    x << 1, 1, 2, 6;
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    Eigen::MatrixXd lambda(4, 1);
    lambda << 1, 0, 1, 1;
    const double v = epls_fit(x, y, lambda, 2.5).v_hat(0);
    // independent arithmetic: (1/2)(15/2) - (7/4)(2), over 1/2
    const double hand = (0.5 * 7.5 - 1.75 * 2.0) / 0.5;
    bool ok = std::abs(v - 0.5) <= 1e-12 && std::abs(hand - 0.5) <= 1e-12;

    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(split_seed(99, seed));
        const Eigen::Index n = 50 + static_cast<Eigen::Index>(rng.below(150));
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.below(8));
        Eigen::VectorXd yy(n);
        Eigen::MatrixXd xx(n, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            yy(i) = burr_sample({0.3, -1.0}, rng.uniform_open());
            for (Eigen::Index j = 0; j < p; ++j) xx(i, j) = rng.normal() * (1.0 + yy(i));
        }
        const double t = order_statistic_desc(yy, 10);
        const Eigen::VectorXd a = epls_fit(xx, yy, Eigen::MatrixXd::Ones(n, p), t).v_hat;
        // plain loops, no shared code with the estimator
        double m1 = 0, my = 0;
        Eigen::VectorXd mx = Eigen::VectorXd::Zero(p), myx = Eigen::VectorXd::Zero(p);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (yy(i) < t) continue;
            m1 += 1;
            my += yy(i);
            for (Eigen::Index j = 0; j < p; ++j) {
                mx(j) += xx(i, j);
                myx(j) += yy(i) * xx(i, j);
            }
        }
        const double dn = static_cast<double>(n);
        m1 /= dn;
        my /= dn;
        mx /= dn;
        myx /= dn;
        const Eigen::VectorXd b = (m1 * myx - my * mx) / m1;
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff()));
        worst = std::max(worst, (a - epls_unmasked_v(xx, yy, t)).cwiseAbs().maxCoeff() /
                                    std::max(1.0, b.cwiseAbs().maxCoeff()));
    }
    ok = ok && worst <= 1e-12;
    return {ok, "hand v = " + fmt(v, 17) + ", max unit-mask discrepancy " + fmt(worst)};
}

// ---- 6 / 8 -----------------------------------------------------------------

std::vector<PanelResult> g_consistency;

PanelConfig find_panel(const std::vector<PanelConfig>& catalog, const std::string& id) {
    for (const auto& p : catalog) {
        if (p.id == id) return p;
    }
    throw std::runtime_error("panel not found: " + id);
}

Outcome desk_consistency() {
    const auto catalog = catalog_panels(20240601, 500, 101);
    struct Case {
        std::string id;
        double bar;
    };
    const std::vector<Case> cases{{"fig01_g0.1_tau-0.1", 0.95}, {"fig01_g0.1_tau-0.9", 0.80}, {"fig02_g0.1_tau-0.1", 0.90}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const PanelConfig pc = find_panel(catalog, c.id);
        bool shape = pc.gen.kappa == 0.5 && pc.gen.n == 500 && pc.gen.p == 101 && pc.gen.burr.gamma == 0.1;
        PanelResult r = run_panel(pc, 50, worker_count());
        const bool hit = shape && r.reps == 50 && r.median_cosine >= c.bar;
        ok = ok && hit;
        detail += c.id + " median " + fmt(r.median_cosine) + " (>= " + fmt(c.bar, 2) + ", excluded " +
                  std::to_string(r.excluded) + ") ";
        g_consistency.push_back(std::move(r));
    }
    return {ok, detail};
}

// ---- 7 ---------------------------------------------------------------------

Outcome ranking() {
    TripletSettings ts;
    ts.seed = 8;
    const auto datasets = synthetic_triplets(ts);
    RankSettings rs;
    rs.seed = 9;
    rs.jobs = worker_count();
    const auto alphas = cli::parse_grid("0.90:0.99:0.01");
    const RankTable table = rank_methods(datasets, alphas, all_methods(), rs);
    bool ok = datasets.size() == 20 && table.skipped.empty();
    std::string detail = "skipped " + std::to_string(table.skipped.size()) + "; ";
    for (double a : alphas) {
        double epls = 0, random = 0, best_other = std::numeric_limits<double>::infinity(), worst_other = 0;
        for (const auto& m : table.mean_ranks) {
            if (std::abs(m.alpha - a) > 1e-9) continue;
            if (m.method == Method::Epls) {
                epls = m.mean_rank;
            } else if (m.method == Method::Random) {
                random = m.mean_rank;
            }
            if (m.method != Method::Epls) best_other = std::min(best_other, m.mean_rank);
            if (m.method != Method::Random) worst_other = std::max(worst_other, m.mean_rank);
        }
        ok = ok && epls < best_other && random > worst_other;
        detail += fmt(a, 2) + ": epls " + fmt(epls, 3) + " random " + fmt(random, 3) + "; ";
    }
    return {ok, detail};
}

// ---- 8 ---------------------------------------------------------------------

Outcome threshold_selection() {
    GeneratorConfig cfg;
    cfg.n = 500;
    cfg.p = 20;
    cfg.seed = 123;
    const SampleSet s = assemble_sample(cfg);
    Rng mrng(124);
    const auto lambda = gen_bar_mask(mask_response(s.y), cfg.p, {-0.5, 0.5, {}}, mrng);
    const ThresholdSelection sel = select_threshold(s.x, s.y, lambda);

    std::vector<double> sorted(s.y.data(), s.y.data() + s.y.size());
    std::sort(sorted.rbegin(), sorted.rend());
    Rng rng(125);
    double worst = 0.0;
    for (int probe = 0; probe < 100; ++probe) {
        const std::size_t k = sel.k_min + rng.below(sel.k_max - sel.k_min + 1);
        // any t in (Y_(k+1), Y_(k)] selects the same top-k rows
        const double lo = sorted[k], hi = sorted[k - 1];
        const double t = lo + (hi - lo) * (1.0 - rng.uniform());
        const double at_t = tail_projection_covariance(s.x, s.y, lambda, t);
        const double r = sel.r_bar[k - sel.k_min];
        worst = std::max(worst, std::abs(at_t - r) / std::max(1e-300, std::abs(r)));
    }
    bool ok = worst <= 1e-12 && sel.k_hat >= 5 && sel.k_hat <= cfg.n / 5;

    std::size_t total = 0, in_range = 0;
    for (const auto& panel : g_consistency) {
        for (std::size_t k : panel.k_hat) {
            ++total;
            in_range += (k >= 5 && k <= panel.config.gen.n / 5) ? 1 : 0;
        }
    }
    ok = ok && total > 0 && in_range == total;
    return {ok, "max relative r_bar jump inside a gap " + fmt(worst) + "; k_hat in range " + std::to_string(in_range) +
                    "/" + std::to_string(total)};
}

// ---- 9 ---------------------------------------------------------------------

Outcome ghcn_parsers() {
    const std::string root = std::string(EPLS_FIXTURE_DIR) + "/ghcn/";
    bool ok = true;
    std::string detail;

    const std::string inventory = io::read_file(root + "ghcnd-stations.txt");
    const auto stations = ghcn::parse_stations(inventory);
    std::istringstream lines(inventory);
    std::string line;
    std::size_t index = 0, exact = 0;
    while (std::getline(lines, line)) {
        if (line.size() < 37) continue;
        const ghcn::Station& s = stations.stations.at(index++);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-11s %8.4f %9.4f %6.1f %-2s %-30s", s.id.c_str(), s.lat, s.lon, s.elevation,
                      s.state.c_str(), s.name.c_str());
        std::string rebuilt(buf);
        std::string original = line.substr(0, std::min<std::size_t>(71, line.size()));
        original.resize(71, ' ');
        exact += rebuilt == original ? 1 : 0;
    }
    ok = ok && index == stations.stations.size() && exact == index;
    detail += "stations re-rendered byte-exact " + std::to_string(exact) + "/" + std::to_string(index) + "; ";

    const std::string dly = io::read_file(root + "dly/USW00013960.dly");
    const auto parsed = ghcn::parse_dly(dly);
    std::istringstream dlines(dly);
    std::size_t fields = 0, matched = 0, frag = 0;
    while (std::getline(dlines, line)) {
        const std::string element = line.substr(17, 4);
        if (element != "PRCP" && element != "TMAX") continue;
        const auto& f = parsed.fragments.at(frag++);
        for (const auto& [day, entry] : f.days) {
            const std::string raw = line.substr(21 + 8 * (day - 1), 5);
            const int value = std::stoi(raw);
            ++fields;
            const bool same = value == -9999 ? entry.state == ghcn::EntryState::Missing
                                             : entry.state == ghcn::EntryState::Value && entry.value == value / 10.0;
            matched += same ? 1 : 0;
        }
        ok = ok && f.station_id == line.substr(0, 11) && f.year == std::stoi(line.substr(11, 4)) &&
             static_cast<int>(f.month) == std::stoi(line.substr(15, 2));
    }
    ok = ok && fields == matched && fields > 0;
    detail += "dly values matched " + std::to_string(matched) + "/" + std::to_string(fields) + "; ";

    const auto& jan = parsed.fragments.at(0);
    const bool prcp = jan.days[0].second.state == ghcn::EntryState::Value && jan.days[0].second.value == 12.5;
    const bool missing = jan.days[10].second.state == ghcn::EntryState::Missing;
    ok = ok && prcp && missing;
    detail += std::string("00125 -> ") + fmt(jan.days[0].second.value) + ", -9999 -> " +
              (missing ? "Missing" : "wrong") + "; ";

    // fuzz: mutated fixture lines and random bytes
    std::vector<std::string> seeds;
    std::istringstream all(dly + inventory);
    while (std::getline(all, line)) seeds.push_back(line);
    Rng rng(2718);
    std::size_t crashes = 0, reported = 0;
    for (int i = 0; i < 10'000; ++i) {
        std::string l;
        if (i % 3 == 0) {
            const std::size_t len = rng.below(300);
            for (std::size_t c = 0; c < len; ++c) l.push_back(static_cast<char>(rng.below(256)));
        } else {
            l = seeds[rng.below(seeds.size())];
            const std::size_t edits = 1 + rng.below(8);
            for (std::size_t e = 0; e < edits && !l.empty(); ++e) {
                const std::size_t pos = rng.below(l.size());
                switch (rng.below(3)) {
                    case 0: l[pos] = static_cast<char>(32 + rng.below(95)); break;
                    case 1: l.erase(pos, 1 + rng.below(20)); break;
                    default: l.insert(pos, 1, static_cast<char>(rng.below(256))); break;
                }
            }
        }
        try {
            const auto d = ghcn::parse_dly(l);
            const auto s = ghcn::parse_stations(l);
            reported += d.errors.size() + s.errors.size();
        } catch (...) {
            ++crashes;
        }
    }
    ok = ok && crashes == 0;
    detail += "fuzz 10000 lines: " + std::to_string(crashes) + " crashes, " + std::to_string(reported) +
              " collected errors";
    return {ok, detail};
}

// ---- 10 --------------------------------------------------------------------

Outcome chisq_gate() {
    const auto bad = testing::synthetic_triplet(2000, 3, testing::TailKind::Pareto, false);
    const auto good = testing::synthetic_triplet(2000, 3);
    const auto rb = ghcn::mask_stationarity_chisq(bad.m1, bad.m2, 10);
    const auto rg = ghcn::mask_stationarity_chisq(good.m1, good.m2, 10);

    // Haldane cells by hand: 2 windows, first all (1,1), second all (0,0), n = 200
    Eigen::VectorXd m(200);
    m.head(100).setOnes();
    m.tail(100).setZero();
    const auto rh = ghcn::mask_stationarity_chisq(m, m, 2);
    const double cells[2][4] = {{0.5, 0.5, 0.5, 100.5}, {100.5, 0.5, 0.5, 0.5}};
    bool table_ok = true;
    for (int w = 0; w < 2; ++w) {
        for (int c = 0; c < 4; ++c) table_ok = table_ok && rh.table(w, c) == cells[w][c];
    }
    // expected 50.5 in the heavy columns, 0.5 in the others; only heavy cells contribute
    const double hand = 4.0 * (50.0 * 50.0) / 50.5;
    const bool stat_ok = std::abs(rh.statistic - hand) <= 1e-9 * hand && rh.df == 3;

    const bool ok = rb.p_value < 1e-6 && rg.p_value > 0.5 && table_ok && stat_ok;
    return {ok, "non-stationary p = " + fmt(rb.p_value) + ", stationary p = " + fmt(rg.p_value) +
                    ", hand statistic " + fmt(hand, 10) + " vs " + fmt(rh.statistic, 10)};
}

// ---- 11 --------------------------------------------------------------------

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "epls_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const io::Json cfg = {
        {"seed", 515},
        {"reps", 12},
        {"n", 300},
        {"p", 31},
        {"panels", {"fig01_g0.4_tau-0.5", "fig03_g0.1_tau-0.1", "fig07_g0.4_tau-0.9", "fig10_g0.1_tau-0.5"}},
        {"ranking",
         {{"datasets", 5}, {"n", 400}, {"trees", 30}, {"alphas", "0.90:0.98:0.04"}, {"tailcov_dataset", 1},
          {"tailcov_k_min", 10}, {"tailcov_k_max", 60}}}};
    io::write_file(root / "config.json", cfg.dump(2));

    std::vector<std::string> codes;
    for (const char* jobs : {"1", "4"}) {
        std::ostringstream out, err;
        const int code = cli::run({"--jobs", jobs, "benchmark", "--config", (root / "config.json").string(), "--out",
                                   (root / ("jobs" + std::string(jobs))).string()},
                                  out, err);
        codes.push_back(std::to_string(code));
        if (code != 0) return {false, "benchmark failed at --jobs " + std::string(jobs) + ": " + err.str()};
    }
    std::size_t files = 0, identical = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "jobs1")) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const fs::path other = root / "jobs4" / fs::relative(entry.path(), root / "jobs1");
        ++files;
        if (fs::exists(other) && io::read_file(entry.path()) == io::read_file(other)) ++identical;
    }
    std::size_t other_files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "jobs4")) {
        other_files += entry.is_regular_file() && entry.path().extension() == ".csv" ? 1 : 0;
    }
    fs::remove_all(root);
    const bool ok = files >= 7 && identical == files && other_files == files;
    return {ok, std::to_string(identical) + "/" + std::to_string(files) + " CSV files byte-identical"};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"mask-marginal-consistency", 30, mask_marginal},
        {"proposition-1-optimality", 10, proposition_one},
        {"garch-tail-index", 60, garch_tail},
        {"hill-plateau", 10, hill_plateau},
        {"epls-estimator-oracle", 60, epls_oracle},
        {"desk-scale-consistency", 300, desk_consistency},
        {"ranking-harness", 120, ranking},
        {"threshold-selection", 60, threshold_selection},
        {"ghcn-parsers", 60, ghcn_parsers},
        {"chisq-mask-gate", 60, chisq_gate},
        {"determinism", 300, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_seconds) {
            o.pass = false;
            o.detail += " [over the " + fmt(c.budget_seconds, 3) + " s budget]";
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << " (" << fmt(secs, 3) << " s): " << o.detail << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
