#include "epls/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "epls/error.hpp"
#include "epls/estimator.hpp"
#include "epls/parallel.hpp"
#include "epls/rng.hpp"
#include "epls/tailstats.hpp"

namespace epls {

double lower_quantile(std::vector<double> values, double alpha) {
    if (values.empty()) throw DataError("lower_quantile: empty input");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("lower_quantile: alpha outside [0, 1]");
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
    return values[rank - 1];
}

std::vector<double> mask_response(const Eigen::VectorXd& y) {
    std::vector<double> out(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        out[static_cast<std::size_t>(i)] = y[i] > 0.0 ? y[i] : std::numeric_limits<double>::min();
    }
    return out;
}

namespace {

struct Replication {
    bool ok = false;
    std::string reason;
    Eigen::VectorXd beta;
    std::size_t k_hat = 0;
};

constexpr std::uint64_t kMaskStream = 0x6d61736bULL;

}  // namespace

PanelResult run_panel(const PanelConfig& config, std::size_t reps, std::size_t jobs) {
    if (reps < 1) throw ConfigError("run_panel: reps must be positive");
    config.gen.validate();
    config.mask.validate(config.gen.p);

    std::vector<Replication> results(reps);
    parallel_for(reps, jobs, [&](std::size_t r) {
        Replication& out = results[r];
        GeneratorConfig gen = config.gen;
        gen.seed = split_seed(config.gen.seed, r);
        try {
            const SampleSet sample = assemble_sample(gen);
            Rng mask_rng(split_seed(gen.seed, kMaskStream));
            const std::vector<double> ym = mask_response(sample.y);
            const MaskMatrix lambda = gen_bar_mask(ym, gen.p, config.mask, mask_rng);
            const ThresholdSelection sel = select_threshold(sample.x, sample.y, lambda);
            out.beta = sel.direction.beta_hat;
            out.k_hat = sel.k_hat;
            out.ok = true;
        } catch (const Error& e) {
            out.reason = "replication " + std::to_string(r) + ": " + e.what();
        }
    });

    PanelResult res;
    res.config = config;
    res.reps = reps;
    res.beta_true = beta_sine(config.gen.p);
    res.beta_true_unit = res.beta_true / res.beta_true.norm();
    const auto p = static_cast<Eigen::Index>(config.gen.p);
    std::vector<const Replication*> kept;
    for (const auto& r : results) {
        if (r.ok) {
            kept.push_back(&r);
        } else {
            ++res.excluded;
            res.exclusion_reasons.push_back(r.reason);
        }
    }
    if (kept.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        res.mean_beta = res.q05_beta = res.q95_beta = Eigen::VectorXd::Constant(p, nan);
        res.mean_cosine = res.median_cosine = nan;
        return res;
    }

    res.mean_beta = Eigen::VectorXd::Zero(p);
    res.q05_beta.resize(p);
    res.q95_beta.resize(p);
    for (const auto* r : kept) {
        res.mean_beta += r->beta;
        const double cosine = r->beta.dot(res.beta_true_unit);
        res.cosines.push_back(cosine);
        res.k_hat.push_back(r->k_hat);
        ++res.k_hat_histogram[r->k_hat];
    }
    res.mean_beta /= static_cast<double>(kept.size());
    std::vector<double> column(kept.size());
    for (Eigen::Index j = 0; j < p; ++j) {
        for (std::size_t r = 0; r < kept.size(); ++r) column[r] = kept[r]->beta[j];
        res.q05_beta[j] = lower_quantile(column, 0.05);
        res.q95_beta[j] = lower_quantile(column, 0.95);
    }
    res.mean_cosine = std::accumulate(res.cosines.begin(), res.cosines.end(), 0.0) /
                      static_cast<double>(res.cosines.size());
    std::vector<double> sorted = res.cosines;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    res.median_cosine = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    return res;
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<PanelConfig> catalog_panels(std::uint64_t base_seed, std::size_t n, std::size_t p) {
    const ArmaParams arma_std{0.8, -0.3};
    const ArmaParams arma_patho{0.99, -0.98};
    const GarchParams garch_std{0.05, 0.1, 0.85};
    const GarchParams garch_igarch{0.05, 0.05, 0.94};
    const std::vector<double> taus{-0.1, -0.5, -0.9};

    struct Scheme {
        int figure;
        Setup setup;
        Dynamics resp;
        Dynamics noise;
        std::vector<double> gammas;
    };
    const std::vector<Scheme> schemes{
        {1, Setup::IidIid, std::monostate{}, std::monostate{}, {0.1, 0.4, 0.7}},
        {2, Setup::ArmaRespGarchNoise, arma_std, garch_std, {0.1, 0.4, 0.7}},
        {3, Setup::ArmaRespGarchNoise, arma_std, garch_igarch, {0.1, 0.4, 0.7}},
        {4, Setup::ArmaRespGarchNoise, arma_patho, garch_std, {0.1, 0.4, 0.7}},
        {5, Setup::ArmaRespGarchNoise, arma_patho, garch_igarch, {0.1, 0.4, 0.7}},
        {6, Setup::GarchRespArmaNoise, garch_std, arma_std, {0.1, 0.4, 0.5}},
        {7, Setup::GarchRespArmaNoise, garch_igarch, arma_std, {0.1, 0.4, 0.5}},
        {8, Setup::GarchRespArmaNoise, garch_std, arma_patho, {0.1, 0.4, 0.5}},
        {9, Setup::GarchRespArmaNoise, garch_igarch, arma_patho, {0.1, 0.4, 0.5}},
        {10, Setup::EstarRespGarchNoise, EstarParams{}, garch_std, {0.1, 0.5}},
        {11, Setup::EstarRespGarchNoise, EstarParams{}, garch_igarch, {0.1, 0.5}},
    };

    std::vector<PanelConfig> panels;
    for (const auto& s : schemes) {
        for (double gamma : s.gammas) {
            for (double tau : taus) {
                PanelConfig pc;
                std::ostringstream id;
                id << "fig" << (s.figure < 10 ? "0" : "") << s.figure << "_g" << gamma << "_tau" << tau;
                pc.id = id.str();
                pc.figure = s.figure;
                pc.gen.setup = s.setup;
                pc.gen.burr = BurrParams{gamma, -1.0};
                pc.gen.kappa = 0.5;
                pc.gen.resp = s.resp;
                pc.gen.noise = s.noise;
                pc.gen.n = n;
                pc.gen.p = p;
                pc.gen.seed = split_seed(base_seed, fnv1a64(pc.id));
                pc.mask.tau = tau;
                pc.mask.alpha_bar = 0.5;
                panels.push_back(std::move(pc));
            }
        }
    }
    return panels;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Epls: return "epls";
        case Method::Epca: return "epca";
        case Method::Elda: return "elda";
        case Method::Sir: return "sir";
        case Method::Esir: return "esir";
        case Method::Erf: return "erf";
        case Method::Random: return "random";
    }
    return "unknown";
}

Method method_from_string(const std::string& s) {
    for (Method m : all_methods()) {
        if (to_string(m) == s) return m;
    }
    throw ConfigError("unknown method: " + s);
}

std::vector<Method> all_methods() {
    return {Method::Epls, Method::Epca, Method::Elda, Method::Sir, Method::Esir, Method::Erf, Method::Random};
}

std::vector<double> average_ranks(const std::vector<double>& scores) {
    const std::size_t m = scores.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<double> ranks(m);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i + 1;
        while (j < m && scores[order[j]] == scores[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
        i = j;
    }
    return ranks;
}

namespace {

Eigen::MatrixXd observed_product(const RankDataset& data) {
    if (data.x.rows() != data.y.size() || data.lambda.rows() != data.x.rows() || data.lambda.cols() != data.x.cols()) {
        throw DataError("dataset " + data.name + ": inconsistent shapes");
    }
    return data.lambda.select(data.x, 0.0);
}

double score(const Eigen::MatrixXd& xo, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double threshold) {
    const Eigen::VectorXd z = xo * beta;
    return tail_covariance(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())),
                           std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), threshold);
}

Eigen::VectorXd direction_on(Method m, const RankDataset& data, const Eigen::MatrixXd& xo, double threshold,
                             const RankSettings& settings, std::uint64_t seed) {
    switch (m) {
        case Method::Epls: return epls_direction(data.x, data.y, data.lambda, threshold).beta_hat;
        case Method::Epca: return epca_direction(xo, data.y, threshold).beta_hat;
        case Method::Elda: return elda_direction(xo, data.y, threshold, settings.elda_slices).beta_hat;
        case Method::Sir: return sir_direction(xo, data.y, settings.sir).beta_hat;
        case Method::Esir: return esir_direction(xo, data.y, threshold, settings.sir).beta_hat;
        case Method::Erf: {
            ForestSettings fs = settings.forest;
            fs.seed = seed;
            fs.jobs = 1;
            return erf_direction(xo, data.y, threshold, fs).beta_hat;
        }
        case Method::Random: {
            Rng rng(seed);
            return random_directions(static_cast<std::size_t>(xo.cols()), settings.random_directions, rng).mean;
        }
    }
    throw ConfigError("unknown method");
}

std::uint64_t method_seed(std::uint64_t base, std::size_t dataset, Method m) {
    return split_seed(split_seed(base, dataset), static_cast<std::uint64_t>(m));
}

}  // namespace

Eigen::VectorXd method_direction(Method m, const RankDataset& data, double threshold, const RankSettings& settings,
                                 std::uint64_t seed) {
    return direction_on(m, data, observed_product(data), threshold, settings, seed);
}

RankTable rank_methods(const std::vector<RankDataset>& datasets, const std::vector<double>& alphas,
                       const std::vector<Method>& methods, const RankSettings& settings) {
    if (methods.empty()) throw ConfigError("rank_methods: no methods");
    struct Cell {
        std::vector<RankRow> rows;
        std::vector<std::string> skipped;
    };
    std::vector<Cell> cells(datasets.size());
    parallel_for(datasets.size(), settings.jobs, [&](std::size_t d) {
        const RankDataset& data = datasets[d];
        Cell& cell = cells[d];
        const Eigen::MatrixXd xo = observed_product(data);
        const std::vector<double> yv(data.y.data(), data.y.data() + data.y.size());
        for (double alpha : alphas) {
            const double threshold = lower_quantile(yv, alpha);
            std::vector<Method> ok_methods;
            std::vector<double> scores;
            for (Method m : methods) {
                try {
                    const Eigen::VectorXd beta =
                        direction_on(m, data, xo, threshold, settings, method_seed(settings.seed, d, m));
                    const double s = score(xo, data.y, beta, threshold);
                    if (!std::isfinite(s)) throw DegenerateError("non-finite tail covariance");
                    ok_methods.push_back(m);
                    scores.push_back(s);
                } catch (const Error& e) {
                    std::ostringstream os;
                    os << data.name << " alpha=" << alpha << " " << to_string(m) << ": " << e.what();
                    cell.skipped.push_back(os.str());
                }
            }
            const std::vector<double> ranks = average_ranks(scores);
            for (std::size_t i = 0; i < ok_methods.size(); ++i) {
                cell.rows.push_back({data.name, alpha, ok_methods[i], scores[i], ranks[i]});
            }
        }
    });

    RankTable table;
    for (auto& cell : cells) {
        table.rows.insert(table.rows.end(), cell.rows.begin(), cell.rows.end());
        table.skipped.insert(table.skipped.end(), cell.skipped.begin(), cell.skipped.end());
    }
    for (double alpha : alphas) {
        for (Method m : methods) {
            MeanRank mr{m, alpha, 0.0, 0};
            for (const auto& row : table.rows) {
                if (row.method == m && row.alpha == alpha) {
                    mr.mean_rank += row.rank;
                    ++mr.count;
                }
            }
            mr.mean_rank = mr.count > 0 ? mr.mean_rank / static_cast<double>(mr.count)
                                        : std::numeric_limits<double>::quiet_NaN();
            table.mean_ranks.push_back(mr);
        }
    }
    return table;
}

std::vector<RankDataset> synthetic_triplets(const TripletSettings& settings) {
    if (settings.count < 1 || settings.n < 50) throw ConfigError("synthetic_triplets: need count >= 1 and n >= 50");
    const BurrParams burr{settings.gamma, -1.0};
    burr.validate();
    MaskConfig mask;
    mask.tau = settings.tau;
    mask.alpha_bar = settings.alpha_bar;
    mask.validate(2);

    Eigen::Vector2d beta(0.8, 0.6);
    Eigen::Matrix2d noise_chol;
    noise_chol << 1.0, 0.0, 0.9, std::sqrt(1.0 - 0.81);

    std::vector<RankDataset> out;
    for (std::size_t d = 0; d < settings.count; ++d) {
        Rng rng(split_seed(settings.seed, d));
        RankDataset data;
        data.name = "synthetic_" + std::to_string(d + 1);
        const auto n = static_cast<Eigen::Index>(settings.n);
        data.y.resize(n);
        data.x.resize(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            data.y[i] = burr_sample(burr, rng.uniform_open());
            Eigen::Vector2d z(rng.normal(), rng.normal());
            data.x.row(i) = (link_g(data.y[i], 0.5) * beta + noise_chol * z).transpose();
        }
        Rng mask_rng = rng.split(kMaskStream);
        const std::vector<double> ym = mask_response(data.y);
        data.lambda = gen_bar_mask(ym, 2, mask, mask_rng);
        out.push_back(std::move(data));
    }
    return out;
}

TailCovCurve tailcov_curve(const RankDataset& data, const std::vector<std::size_t>& ks,
                           const std::vector<Method>& methods, const RankSettings& settings) {
    const Eigen::MatrixXd xo = observed_product(data);
    const auto n = static_cast<std::size_t>(data.y.size());
    Rng rng(split_seed(settings.seed, fnv1a64(data.name)));
    const RandomDirections random = random_directions(static_cast<std::size_t>(xo.cols()),
                                                      settings.random_directions, rng);
    TailCovCurve curve;
    for (Method m : methods) curve.methods[m] = {};
    for (std::size_t k : ks) {
        if (k < 2 || k >= n) throw ConfigError("tailcov_curve: k must lie in [2, n - 1]");
        // Y_{n-k,n} as threshold leaves exactly the top k (without ties) above it.
        const double threshold = order_statistic_desc(data.y, k + 1);
        curve.k.push_back(k);
        curve.threshold.push_back(threshold);
        for (Method m : methods) {
            double value = std::numeric_limits<double>::quiet_NaN();
            try {
                const Eigen::VectorXd beta = m == Method::Random
                                                 ? random.mean
                                                 : direction_on(m, data, xo, threshold, settings,
                                                                split_seed(settings.seed, static_cast<std::uint64_t>(m)));
                value = score(xo, data.y, beta, threshold);
            } catch (const Error&) {
            }
            curve.methods[m].push_back(value);
        }
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        try {
            for (Eigen::Index c = 0; c < random.directions.cols(); ++c) {
                const double s = score(xo, data.y, random.directions.col(c), threshold);
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
        } catch (const Error&) {
            lo = hi = std::numeric_limits<double>::quiet_NaN();
        }
        curve.random_min.push_back(lo);
        curve.random_max.push_back(hi);
    }
    return curve;
}

}  // namespace epls
