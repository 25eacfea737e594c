#include "epls/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "epls/error.hpp"
#include "epls/estimator.hpp"
#include "epls/gen.hpp"
#include "epls/ghcn.hpp"
#include "epls/io.hpp"
#include "epls/mask.hpp"
#include "epls/montecarlo.hpp"
#include "epls/parallel.hpp"
#include "epls/tailstats.hpp"

namespace fs = std::filesystem;

namespace epls::cli {

using io::Json;

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(io::parse_double(item));
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
            throw ConfigError("grid must be lo:hi:step with step > 0 and hi >= lo");
        }
        const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(std::round((parts[0] + static_cast<double>(i) * parts[2]) * 1e10) / 1e10);
        }
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(io::parse_double(item));
    }
    if (out.empty()) throw ConfigError("empty grid");
    for (double a : out) {
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("grid values must lie in (0, 1)");
    }
    return out;
}

namespace {

std::uint64_t seed_override(std::uint64_t seed) {
    if (const char* env = std::getenv("EPLS_SEED"); env && *env) {
        std::uint64_t v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("EPLS_SEED is not an unsigned integer");
        return v;
    }
    return seed;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(io::parse_double(item));
    return out;
}

Dynamics parse_dynamics(const std::string& kind, const std::string& text) {
    const auto v = parse_list(text);
    if (kind == "arma") {
        if (v.size() != 2) throw ConfigError("ARMA parameters are phi,theta");
        return ArmaParams{v[0], v[1]};
    }
    if (kind == "garch") {
        if (v.size() != 3) throw ConfigError("GARCH parameters are omega,alpha,beta");
        return GarchParams{v[0], v[1], v[2]};
    }
    if (v.size() != 2) throw ConfigError("ESTAR parameters are phi_low,phi_high");
    return EstarParams{v[0], v[1]};
}

void set_default_dynamics(GeneratorConfig& g, const std::string& resp, const std::string& noise) {
    switch (g.setup) {
        case Setup::IidIid:
            g.resp = std::monostate{};
            g.noise = std::monostate{};
            if (!resp.empty() || !noise.empty()) throw ConfigError("iid setup takes no dynamics parameters");
            return;
        case Setup::ArmaRespGarchNoise:
            g.resp = resp.empty() ? Dynamics{ArmaParams{0.8, -0.3}} : parse_dynamics("arma", resp);
            g.noise = noise.empty() ? Dynamics{GarchParams{0.05, 0.1, 0.85}} : parse_dynamics("garch", noise);
            return;
        case Setup::GarchRespArmaNoise:
            g.resp = resp.empty() ? Dynamics{GarchParams{0.05, 0.1, 0.85}} : parse_dynamics("garch", resp);
            g.noise = noise.empty() ? Dynamics{ArmaParams{0.8, -0.3}} : parse_dynamics("arma", noise);
            return;
        case Setup::EstarRespGarchNoise:
            g.resp = resp.empty() ? Dynamics{EstarParams{}} : parse_dynamics("estar", resp);
            g.noise = noise.empty() ? Dynamics{GarchParams{0.05, 0.1, 0.85}} : parse_dynamics("garch", noise);
            return;
    }
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_manifest(const fs::path& dir, io::RunManifest m, std::chrono::steady_clock::time_point t0) {
    m.tool_version = kVersion;
    m.wall_clock_seconds = elapsed(t0);
    io::write_file(dir / "manifest.json", io::manifest_json(m).dump(2) + "\n");
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
    std::string setup = "iid";
    double gamma = 0.1;
    double rho = -1.0;
    double tau = -0.1;
    double alpha_bar = 0.5;
    double kappa = 0.5;
    double rho_c = 0.8;
    std::size_t n = 500;
    std::size_t p = 101;
    std::uint64_t seed = 0;
    std::string resp;
    std::string noise;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    GeneratorConfig g;
    g.setup = setup_from_string(a.setup);
    g.burr = BurrParams{a.gamma, a.rho};
    g.kappa = a.kappa;
    g.rho_c = a.rho_c;
    g.n = a.n;
    g.p = a.p;
    g.seed = seed_override(a.seed);
    set_default_dynamics(g, a.resp, a.noise);
    MaskConfig mc;
    mc.tau = a.tau;
    mc.alpha_bar = a.alpha_bar;
    mc.validate(a.p);

    const SampleSet s = assemble_sample(g);
    Rng mask_rng(split_seed(g.seed, 0x6d61736bULL));
    const MaskMatrix lambda = gen_bar_mask(mask_response(s.y), g.p, mc, mask_rng);

    const fs::path dir(a.out);
    io::write_file(dir / "sample.csv", io::sample_csv(s.y, s.x, lambda));
    io::write_file(dir / "truth.csv", io::truth_csv(s.beta_true));

    io::RunManifest m;
    m.base_seed = g.seed;
    m.config = {{"command", "simulate"}, {"setup", a.setup}, {"gamma", a.gamma}, {"rho", a.rho},
                {"tau", a.tau},         {"alpha_bar", a.alpha_bar}, {"kappa", a.kappa}, {"rho_c", a.rho_c},
                {"n", a.n},             {"p", a.p}, {"seed", g.seed}, {"resp", a.resp}, {"noise", a.noise}};
    m.outputs = {"sample.csv", "truth.csv"};
    m.diagnostics = {{"observed_fraction", lambda.mean()}};
    write_manifest(dir, m, t0);
    out << "wrote " << (dir / "sample.csv").string() << "\n";
    return 0;
}

// ---- estimate ------------------------------------------------------------

struct EstimateArgs {
    std::string input;
    bool automatic = false;
    std::optional<std::size_t> k;
    std::optional<double> threshold;
    std::string out;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
    const io::ObservedSample s = io::parse_sample_csv(io::read_file(a.input));
    Json result;
    if (a.k) {
        Direction d = epls_direction_at_k(s.x, s.y, s.lambda, *a.k);
        result["direction"] = io::direction_json(d);
    } else if (a.threshold) {
        Direction d = epls_direction(s.x, s.y, s.lambda, *a.threshold);
        result["direction"] = io::direction_json(d);
    } else {
        const ThresholdSelection sel = select_threshold(s.x, s.y, s.lambda);
        result["direction"] = io::direction_json(sel.direction);
        result["selection"] = io::threshold_json(sel);
    }
    result["n"] = s.y.size();
    result["p"] = s.x.cols();
    result["observed_fraction"] = s.lambda.mean();
    const std::string text = result.dump(2) + "\n";
    if (a.out.empty()) {
        out << text;
    } else {
        io::write_file(a.out, text);
    }
    return 0;
}

// ---- hill ----------------------------------------------------------------

struct HillArgs {
    std::string input;
    std::string column = "y";
    std::optional<std::size_t> k_max;
    std::optional<std::size_t> window;
    double slope_tol = 2e-4;
    double var_tol = 0.05;
    double gamma_min = 0.2;
    std::string out;
};

int cmd_hill(const HillArgs& a, std::ostream& out) {
    const io::CsvTable t = io::parse_csv(io::read_file(a.input));
    const std::size_t col = t.column(a.column);
    std::vector<double> y;
    for (const auto& row : t.rows) {
        if (!row[col].empty()) y.push_back(io::parse_double(row[col]));
    }
    std::size_t n_pos = 0;
    for (double v : y) n_pos += v > 0.0 && std::isfinite(v) ? 1 : 0;
    const std::size_t k_max = a.k_max.value_or(n_pos / 2);
    PlateauSettings ps = PlateauSettings::defaults_for(k_max);
    if (a.window) ps.window = *a.window;
    ps.slope_tol = a.slope_tol;
    ps.var_tol = a.var_tol;
    ps.gamma_min = a.gamma_min;
    const HillDiagnostics hd = hill_diagnostics(y, k_max, ps);
    if (hd.hill.empty()) throw InsufficientTailError("hill: not enough positive values");

    Json j;
    j["n_positive"] = n_pos;
    j["k_max"] = k_max;
    j["hill"] = hd.hill;
    j["settings"] = {{"window", ps.window}, {"slope_tol", ps.slope_tol}, {"var_tol", ps.var_tol},
                     {"gamma_min", ps.gamma_min}};
    if (hd.plateau) {
        j["plateau"] = {{"k_start", hd.plateau->k_start},
                        {"k_end", hd.plateau->k_end},
                        {"gamma_mean", hd.plateau->gamma_mean}};
    } else {
        j["plateau"] = nullptr;
    }
    const std::string text = j.dump(2) + "\n";
    if (a.out.empty()) {
        out << text;
    } else {
        io::write_file(a.out, text);
    }
    return 0;
}

// ---- benchmark -----------------------------------------------------------

struct BenchmarkArgs {
    std::string config;
    std::string out;
    std::size_t jobs = 1;
    bool full = false;
};

std::vector<double> alphas_from(const Json& j, const char* key, const std::string& fallback) {
    if (!j.contains(key)) return parse_grid(fallback);
    const Json& v = j.at(key);
    if (v.is_string()) return parse_grid(v.get<std::string>());
    return v.get<std::vector<double>>();
}

int cmd_benchmark(const BenchmarkArgs& a, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    Json cfg;
    try {
        cfg = Json::parse(io::read_file(a.config));
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("benchmark config: ") + e.what());
    }
    try {
        const std::uint64_t seed = seed_override(cfg.value("seed", std::uint64_t{0}));
        const fs::path dir = a.out.empty() ? fs::path(cfg.value("out", std::string("benchmark"))) : fs::path(a.out);
        std::size_t reps = cfg.value("reps", std::size_t{50});
        if (a.full || cfg.value("full", false)) reps = 500;
        const std::size_t n = cfg.value("n", std::size_t{500});
        const std::size_t p = cfg.value("p", std::size_t{101});

        std::vector<PanelConfig> selected;
        const auto catalog = catalog_panels(seed, n, p);
        if (cfg.contains("panels")) {
            const Json& sel = cfg.at("panels");
            if (sel.is_string() && sel.get<std::string>() == "all") {
                selected = catalog;
            } else {
                for (const auto& id : sel.get<std::vector<std::string>>()) {
                    const auto it = std::find_if(catalog.begin(), catalog.end(),
                                                 [&](const PanelConfig& pc) { return pc.id == id; });
                    if (it == catalog.end()) throw ConfigError("unknown panel id: " + id);
                    selected.push_back(*it);
                }
            }
        }
        if (cfg.contains("figures")) {
            for (int fig : cfg.at("figures").get<std::vector<int>>()) {
                for (const auto& pc : catalog) {
                    if (pc.figure == fig) selected.push_back(pc);
                }
            }
        }

        io::RunManifest m;
        m.base_seed = seed;
        m.config = cfg;
        Json panel_diag = Json::array();
        for (const auto& pc : selected) {
            const PanelResult r = run_panel(pc, reps, a.jobs);
            io::write_file(dir / "panels" / (pc.id + ".csv"), io::panel_csv(r));
            io::write_file(dir / "panels" / (pc.id + ".json"), io::panel_summary(r).dump(2) + "\n");
            m.outputs.push_back("panels/" + pc.id + ".csv");
            panel_diag.push_back({{"id", pc.id}, {"excluded", r.excluded}, {"median_cosine", r.median_cosine}});
            err << "panel " << pc.id << " reps=" << reps << " excluded=" << r.excluded
                << " median_cosine=" << io::format_double(r.median_cosine) << "\n";
        }
        m.diagnostics["panels"] = panel_diag;

        if (cfg.contains("ranking")) {
            const Json& rk = cfg.at("ranking");
            TripletSettings ts;
            ts.count = rk.value("datasets", std::size_t{20});
            ts.n = rk.value("n", std::size_t{600});
            ts.gamma = rk.value("gamma", 0.3);
            ts.tau = rk.value("tau", -0.1);
            ts.alpha_bar = rk.value("alpha_bar", 0.5);
            ts.seed = split_seed(seed, 0x72616e6bULL);
            RankSettings rs;
            rs.seed = split_seed(seed, 0x6d657468ULL);
            rs.jobs = a.jobs;
            rs.forest.n_trees = rk.value("trees", std::size_t{100});
            const auto datasets = synthetic_triplets(ts);
            const auto alphas = alphas_from(rk, "alphas", "0.90:0.99:0.01");
            const RankTable table = rank_methods(datasets, alphas, all_methods(), rs);
            io::write_file(dir / "ranks.csv", io::ranks_csv(table));
            io::write_file(dir / "mean_ranks.csv", io::mean_ranks_csv(table));
            m.outputs.push_back("ranks.csv");
            m.outputs.push_back("mean_ranks.csv");
            m.diagnostics["ranking_skipped"] = table.skipped;
            err << "ranking datasets=" << datasets.size() << " alphas=" << alphas.size()
                << " skipped=" << table.skipped.size() << "\n";

            if (rk.contains("tailcov_dataset")) {
                const auto idx = rk.at("tailcov_dataset").get<std::size_t>();
                if (idx >= datasets.size()) throw ConfigError("tailcov_dataset out of range");
                std::vector<std::size_t> ks;
                const std::size_t k_hi = std::min<std::size_t>(rk.value("tailcov_k_max", std::size_t{200}), ts.n - 1);
                for (std::size_t k = rk.value("tailcov_k_min", std::size_t{10}); k <= k_hi; ++k) ks.push_back(k);
                const TailCovCurve curve = tailcov_curve(datasets[idx], ks, all_methods(), rs);
                io::write_file(dir / "tailcov.csv", io::tailcov_csv(curve));
                m.outputs.push_back("tailcov.csv");
            }
        }
        if (selected.empty() && !cfg.contains("ranking")) throw ConfigError("benchmark config selects nothing");
        write_manifest(dir, m, t0);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("benchmark config: ") + e.what());
    }
    return 0;
}

// ---- ghcn ----------------------------------------------------------------

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ' ');
    return s;
}

int cmd_ghcn_stations(const std::string& inventory, const std::string& state, const std::string& keywords,
                      const std::string& out_path, std::ostream& out, std::ostream& err) {
    const ghcn::StationParse parsed = ghcn::parse_stations(io::read_file(inventory));
    for (const auto& e : parsed.errors) err << "warning kind=data line=" << e.line << " message=" << quote(e.message) << "\n";
    ghcn::StationFilter filter;
    filter.state = state;
    if (keywords == "none") {
        filter.keywords.clear();
    } else if (!keywords.empty()) {
        filter.keywords.clear();
        std::stringstream ss(keywords);
        std::string k;
        while (std::getline(ss, k, ',')) filter.keywords.push_back(k);
    }
    std::string csv = "id,lat,lon,elevation,state,name\n";
    for (const auto& s : ghcn::filter_stations(parsed.stations, filter)) {
        csv += io::join_csv({s.id, io::format_double(s.lat), io::format_double(s.lon), io::format_double(s.elevation),
                             s.state, csv_safe(s.name)});
    }
    if (out_path.empty()) {
        out << csv;
    } else {
        io::write_file(out_path, csv);
    }
    return 0;
}

struct ExtractArgs {
    std::string dly_dir;
    std::string elements = "PRCP,TMAX";
    std::string from = "2020-01-01";
    std::string to = "2024-12-31";
    std::string out;
    std::size_t jobs = 1;
};

int cmd_ghcn_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
    const auto from = ghcn::parse_date(a.from);
    const auto to = ghcn::parse_date(a.to);
    if (!from || !to) throw ConfigError("--from/--to must be YYYY-MM-DD");
    std::vector<ghcn::Element> wanted;
    {
        std::stringstream ss(a.elements);
        std::string e;
        while (std::getline(ss, e, ',')) {
            const auto el = ghcn::element_from_string(e);
            if (!el) throw ConfigError("unsupported element " + e);
            wanted.push_back(*el);
        }
    }
    if (!fs::is_directory(a.dly_dir)) throw DataError("not a directory: " + a.dly_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.dly_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".dly") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ghcn::DlyParse> parsed(files.size());
    parallel_for(files.size(), a.jobs, [&](std::size_t i) { parsed[i] = ghcn::parse_dly(io::read_file(files[i])); });
    std::vector<ghcn::DlyFragment> fragments;
    for (std::size_t i = 0; i < files.size(); ++i) {
        for (const auto& e : parsed[i].errors) {
            err << "warning kind=data file=" << quote(files[i].filename().string()) << " line=" << e.line
                << " message=" << quote(e.message) << "\n";
        }
        for (auto& f : parsed[i].fragments) {
            if (std::find(wanted.begin(), wanted.end(), f.element) != wanted.end()) fragments.push_back(std::move(f));
        }
    }
    const auto series = ghcn::assemble_series(fragments, *from, *to);
    io::write_file(a.out, io::series_csv(series));
    out << "wrote " << series.size() << " series from " << files.size() << " files to " << a.out << "\n";
    return 0;
}

int cmd_ghcn_triplets(const std::string& config_path, const std::string& out_dir, std::size_t jobs, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    Json cfg;
    try {
        cfg = Json::parse(io::read_file(config_path));
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("triplets config: ") + e.what());
    }
    try {
        const fs::path base = fs::path(config_path).parent_path();
        fs::path series_path = cfg.at("series").get<std::string>();
        if (series_path.is_relative()) series_path = base / series_path;
        const auto series = io::parse_series_csv(io::read_file(series_path));
        const auto policy = cfg.value("missing_policy", std::string("drop")) == "impute_zero"
                                ? ghcn::MissingPolicy::ImputeZero
                                : ghcn::MissingPolicy::Drop;
        ghcn::AdmissibilitySettings gates;
        gates.x_min_missing = cfg.value("x_min_missing", gates.x_min_missing);
        gates.x_max_missing = cfg.value("x_max_missing", gates.x_max_missing);
        gates.chisq_windows = cfg.value("chisq_windows", gates.chisq_windows);
        gates.chisq_level = cfg.value("chisq_level", gates.chisq_level);
        gates.drift_gate = cfg.value("drift_gate", gates.drift_gate);
        gates.rolling_window = cfg.value("rolling_window", gates.rolling_window);
        gates.max_mean_drift = cfg.value("max_mean_drift", gates.max_mean_drift);
        gates.max_corr_range = cfg.value("max_corr_range", gates.max_corr_range);
        const double y_max_missing = cfg.value("y_max_missing", 0.01);

        std::vector<ghcn::YWithX> candidates;
        for (const auto& s : series) {
            if (s.element != ghcn::Element::Prcp) continue;
            ghcn::YWithX c;
            c.y = ghcn::classify_y(s, policy, y_max_missing);
            if (!c.y.eligible || c.y.dates.empty()) continue;
            for (const auto& x : series) {
                if (x.element != ghcn::Element::Tmax) continue;
                auto xc = ghcn::classify_x(x, c.y.dates, gates.x_min_missing, gates.x_max_missing);
                if (xc.eligible) c.x.push_back(std::move(xc));
            }
            candidates.push_back(std::move(c));
        }
        const auto triplets = ghcn::build_triplets(candidates);
        std::vector<ghcn::Verdict> verdicts(triplets.size());
        parallel_for(triplets.size(), jobs, [&](std::size_t i) { verdicts[i] = ghcn::admissibility(triplets[i], gates); });

        const fs::path dir(out_dir);
        std::string summary = "y_station,x1_station,x2_station,n,passed,failed_gate,chisq_p,gamma_hat\n";
        std::size_t admissible = 0;
        io::RunManifest m;
        m.config = cfg;
        m.inputs = {series_path.string()};
        for (std::size_t i = 0; i < triplets.size(); ++i) {
            const auto& t = triplets[i];
            const auto& v = verdicts[i];
            summary += io::join_csv({t.y_station, t.x1_station, t.x2_station, std::to_string(t.y.size()),
                                     v.passed ? "1" : "0", v.failed_gate.value_or(""), io::format_double(v.chisq_p),
                                     v.gamma_hat ? io::format_double(*v.gamma_hat) : ""});
            if (v.passed) {
                ++admissible;
                const std::string file = "triplet_" + t.name() + ".csv";
                io::write_file(dir / file, io::triplet_csv(t));
                m.outputs.push_back(file);
            }
        }
        io::write_file(dir / "verdicts.csv", summary);
        m.outputs.push_back("verdicts.csv");
        m.diagnostics = {{"y_candidates", candidates.size()}, {"triplets", triplets.size()}, {"admissible", admissible}};
        write_manifest(dir, m, t0);
        out << "triplets=" << triplets.size() << " admissible=" << admissible << "\n";
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("triplets config: ") + e.what());
    }
    return 0;
}

int cmd_ghcn_benchmark(const std::string& triplet_dir, const std::string& alphas_text, const std::string& out_path,
                       std::uint64_t seed, std::size_t jobs, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!fs::is_directory(triplet_dir)) throw DataError("not a directory: " + triplet_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(triplet_dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.rfind("triplet_", 0) == 0 && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no triplet_*.csv files in " + triplet_dir);
    std::vector<RankDataset> datasets;
    for (const auto& f : files) {
        const std::string stem = f.stem().string().substr(std::string("triplet_").size());
        datasets.push_back(io::to_rank_dataset(io::parse_triplet_csv(io::read_file(f), stem)));
    }
    RankSettings rs;
    rs.seed = seed_override(seed);
    rs.jobs = jobs;
    const RankTable table = rank_methods(datasets, parse_grid(alphas_text), all_methods(), rs);
    const fs::path outp(out_path);
    io::write_file(outp, io::ranks_csv(table));
    const fs::path dir = outp.has_parent_path() ? outp.parent_path() : fs::path(".");
    io::write_file(dir / "mean_ranks.csv", io::mean_ranks_csv(table));
    io::RunManifest m;
    m.base_seed = rs.seed;
    m.config = {{"command", "ghcn benchmark"}, {"alphas", alphas_text}, {"seed", rs.seed}};
    m.inputs = {triplet_dir};
    m.outputs = {outp.filename().string(), "mean_ranks.csv"};
    m.diagnostics = {{"datasets", datasets.size()}, {"skipped", table.skipped}};
    write_manifest(dir, m, t0);
    out << "ranked " << datasets.size() << " triplets, skipped cells " << table.skipped.size() << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Extreme partial least squares under missing data"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::size_t jobs = 1;
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate one masked dataset");
    s->add_option("--setup", sim.setup, "iid, arma-garch, garch-arma or estar-garch");
    s->add_option("--gamma", sim.gamma, "Tail index of the Burr XII innovations");
    s->add_option("--rho", sim.rho, "Second-order parameter");
    s->add_option("--tau", sim.tau, "Mask exponent (< 0)");
    s->add_option("--alpha-bar", sim.alpha_bar, "Mask autoregressive weight");
    s->add_option("--kappa", sim.kappa, "Link exponent");
    s->add_option("--rho-c", sim.rho_c, "Cross-sectional noise correlation");
    s->add_option("--n", sim.n, "Sample size");
    s->add_option("--p", sim.p, "Dimension");
    s->add_option("--seed", sim.seed, "Base seed (EPLS_SEED overrides)");
    s->add_option("--resp-params", sim.resp, "Response dynamics, comma separated");
    s->add_option("--noise-params", sim.noise, "Noise dynamics, comma separated");
    s->add_option("--out", sim.out, "Output directory")->required();

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Estimate the EPLS direction from a sample CSV");
    e->add_option("--input", est.input, "Sample CSV (blank x cells are missing)")->required();
    auto* auto_flag = e->add_flag("--auto", est.automatic, "Select k automatically (default)");
    auto* k_opt = e->add_option("--k", est.k, "Use the k-th largest response as threshold");
    auto* t_opt = e->add_option("--threshold", est.threshold, "Fixed threshold");
    k_opt->excludes(t_opt)->excludes(auto_flag);
    t_opt->excludes(auto_flag);
    e->add_option("--out", est.out, "Output JSON file (stdout when omitted)");

    HillArgs hill;
    auto* h = app.add_subcommand("hill", "Hill curve and plateau detection");
    h->add_option("--input", hill.input, "CSV file")->required();
    h->add_option("--column", hill.column, "Column holding the sample");
    h->add_option("--k-max", hill.k_max, "Largest k (default n_pos / 2)");
    h->add_option("--window", hill.window, "Plateau window (default max(10, 0.3 k_max))");
    h->add_option("--slope-tol", hill.slope_tol, "Slope tolerance");
    h->add_option("--var-tol", hill.var_tol, "Standard deviation tolerance");
    h->add_option("--gamma-min", hill.gamma_min, "Minimum plateau level");
    h->add_option("--out", hill.out, "Output JSON file (stdout when omitted)");

    BenchmarkArgs bench;
    auto* b = app.add_subcommand("benchmark", "Monte-Carlo panels and the ranking harness");
    b->add_option("--config", bench.config, "JSON config")->required();
    b->add_option("--out", bench.out, "Output directory (overrides the config)");
    b->add_flag("--full", bench.full, "500 replications per panel");

    auto* g = app.add_subcommand("ghcn", "GHCN-Daily ingestion");
    g->require_subcommand(1);
    std::string inventory, state = "TX", keywords, stations_out;
    auto* gs = g->add_subcommand("stations", "Filter the station inventory");
    gs->add_option("--inventory", inventory, "ghcnd-stations.txt")->required();
    gs->add_option("--state", state, "Two-letter state code");
    gs->add_option("--keywords", keywords, "Comma-separated name keywords, or 'none'");
    gs->add_option("--out", stations_out, "Output CSV (stdout when omitted)");

    ExtractArgs ext;
    auto* gx = g->add_subcommand("extract", "Extract daily series from .dly files");
    gx->add_option("--dly-dir", ext.dly_dir, "Directory of .dly files")->required();
    gx->add_option("--elements", ext.elements, "PRCP,TMAX");
    gx->add_option("--from", ext.from, "First day, YYYY-MM-DD");
    gx->add_option("--to", ext.to, "Last day, YYYY-MM-DD");
    gx->add_option("--out", ext.out, "Output series CSV")->required();

    std::string trip_config, trip_out;
    auto* gt = g->add_subcommand("triplets", "Build and gate (Y, X1, X2) triplets");
    gt->add_option("--config", trip_config, "JSON config")->required();
    gt->add_option("--out", trip_out, "Output directory")->required();

    std::string bench_dir, bench_alphas = "0.90:0.99:0.01", bench_out;
    std::uint64_t bench_seed = 0;
    auto* gb = g->add_subcommand("benchmark", "Rank methods on admissible triplets");
    gb->add_option("--triplets", bench_dir, "Directory from 'ghcn triplets'")->required();
    gb->add_option("--alphas", bench_alphas, "lo:hi:step or comma list");
    gb->add_option("--out", bench_out, "Output ranks CSV")->required();
    gb->add_option("--seed", bench_seed, "Seed for the stochastic methods (EPLS_SEED overrides)");

    std::vector<std::string> argv_store{"epls"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::Success&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& pe) {
        err << "error kind=usage message=" << quote(pe.what()) << "\n" << app.help();
        return 1;
    }

    try {
        ext.jobs = jobs;
        if (s->parsed()) return cmd_simulate(sim, out);
        if (e->parsed()) return cmd_estimate(est, out);
        if (h->parsed()) return cmd_hill(hill, out);
        if (b->parsed()) {
            bench.jobs = jobs;
            return cmd_benchmark(bench, err);
        }
        if (gs->parsed()) return cmd_ghcn_stations(inventory, state, keywords, stations_out, out, err);
        if (gx->parsed()) return cmd_ghcn_extract(ext, out, err);
        if (gt->parsed()) return cmd_ghcn_triplets(trip_config, trip_out, jobs, out);
        if (gb->parsed()) return cmd_ghcn_benchmark(bench_dir, bench_alphas, bench_out, bench_seed, jobs, out);
    } catch (const Error& ex) {
        const char* kind = ex.kind() == ErrorKind::Usage ? "usage" : ex.kind() == ErrorKind::Data ? "data" : "numerical";
        err << "error kind=" << kind << " message=" << quote(ex.what()) << "\n";
        return static_cast<int>(ex.kind());
    } catch (const fs::filesystem_error& ex) {
        err << "error kind=data message=" << quote(ex.what()) << "\n";
        return 2;
    }
    err << "error kind=usage message=\"no command\"\n";
    return 1;
}

}  // namespace epls::cli
