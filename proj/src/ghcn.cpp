#include "epls/ghcn.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "epls/error.hpp"

namespace epls::ghcn {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// 1-based inclusive columns, clipped to the line.
std::string_view columns(std::string_view line, std::size_t first, std::size_t last) {
    if (first > line.size()) return {};
    return line.substr(first - 1, std::min(last, line.size()) - first + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t number = 0;
    while (!text.empty()) {
        const std::size_t end = text.find('\n');
        std::string_view line = text.substr(0, end);
        text.remove_prefix(end == std::string_view::npos ? text.size() : end + 1);
        ++number;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        fn(number, line);
    }
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (!parse_number(text.substr(0, 4), y) || !parse_number(text.substr(5, 2), m) ||
        !parse_number(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

StationParse parse_stations(std::string_view text) {
    StationParse out;
    for_each_line(text, [&](std::size_t number, std::string_view line) {
        if (line.size() < 37) {
            out.errors.push_back({number, "station line shorter than 37 columns"});
            return;
        }
        Station s;
        s.id = std::string(columns(line, 1, 11));
        if (trim(s.id).size() != 11) {
            out.errors.push_back({number, "station id is not 11 characters"});
            return;
        }
        if (!parse_number(columns(line, 13, 20), s.lat) || !parse_number(columns(line, 22, 30), s.lon) ||
            !parse_number(columns(line, 32, 37), s.elevation)) {
            out.errors.push_back({number, "malformed latitude, longitude or elevation"});
            return;
        }
        s.state = std::string(trim(columns(line, 39, 40)));
        s.name = std::string(trim(columns(line, 42, 71)));
        out.stations.push_back(std::move(s));
    });
    return out;
}

std::string to_string(Element e) { return e == Element::Prcp ? "PRCP" : "TMAX"; }

std::optional<Element> element_from_string(std::string_view s) {
    if (s == "PRCP") return Element::Prcp;
    if (s == "TMAX") return Element::Tmax;
    return std::nullopt;
}

DlyParse parse_dly(std::string_view text) {
    constexpr std::size_t kLineLength = 21 + 8 * 31;
    DlyParse out;
    for_each_line(text, [&](std::size_t number, std::string_view line) {
        if (line.size() < 21) {
            out.errors.push_back({number, "dly line shorter than its 21-column header"});
            return;
        }
        const auto element = element_from_string(columns(line, 18, 21));
        if (!element) return;
        if (line.size() < kLineLength) {
            out.errors.push_back({number, "dly line shorter than 269 columns"});
            return;
        }
        DlyFragment frag;
        frag.station_id = std::string(columns(line, 1, 11));
        frag.element = *element;
        if (!parse_number(columns(line, 12, 15), frag.year) || !parse_number(columns(line, 16, 17), frag.month) ||
            frag.month < 1 || frag.month > 12) {
            out.errors.push_back({number, "malformed year or month"});
            return;
        }
        for (unsigned d = 1; d <= 31; ++d) {
            const std::size_t first = 22 + 8 * (d - 1);
            int raw = 0;
            if (!parse_number(columns(line, first, first + 4), raw)) {
                out.errors.push_back({number, "malformed value for day " + std::to_string(d)});
                return;
            }
            const std::chrono::year_month_day ymd{std::chrono::year{frag.year}, std::chrono::month{frag.month},
                                                  std::chrono::day{d}};
            if (!ymd.ok()) continue;
            Entry e;
            if (raw == -9999) {
                e.state = EntryState::Missing;
            } else {
                e.state = EntryState::Value;
                e.value = static_cast<double>(raw) / 10.0;
            }
            frag.days.emplace_back(d, e);
        }
        out.fragments.push_back(std::move(frag));
    });
    return out;
}

std::vector<DailySeries> assemble_series(const std::vector<DlyFragment>& fragments, Date from, Date to) {
    if (to < from) throw DataError("assemble_series: empty date range");
    const auto length = static_cast<std::size_t>((to - from).count() + 1);
    std::map<std::pair<std::string, Element>, DailySeries> series;
    for (const auto& frag : fragments) {
        for (const auto& [day, entry] : frag.days) {
            const Date date{std::chrono::year{frag.year} / std::chrono::month{frag.month} / std::chrono::day{day}};
            if (date < from || date > to) continue;
            auto [it, inserted] = series.try_emplace({frag.station_id, frag.element});
            DailySeries& s = it->second;
            if (inserted) {
                s.station_id = frag.station_id;
                s.element = frag.element;
                s.dates.resize(length);
                for (std::size_t i = 0; i < length; ++i) s.dates[i] = from + std::chrono::days{i};
                s.values.assign(length, Entry{});
            }
            s.values[static_cast<std::size_t>((date - from).count())] = entry;
        }
    }
    std::vector<DailySeries> out;
    out.reserve(series.size());
    for (auto& [key, s] : series) out.push_back(std::move(s));
    return out;
}

std::vector<Station> filter_stations(const std::vector<Station>& stations, const StationFilter& filter) {
    std::vector<std::string> keywords;
    for (const auto& k : filter.keywords) keywords.push_back(lower(k));
    std::vector<Station> out;
    for (const auto& s : stations) {
        bool region = true;
        if (filter.bbox) {
            const auto& b = *filter.bbox;
            region = s.lat >= b[0] && s.lat <= b[1] && s.lon >= b[2] && s.lon <= b[3];
        } else if (filter.state) {
            region = s.state == *filter.state;
        }
        if (!region) continue;
        const std::string name = lower(s.name);
        const bool named = keywords.empty() || std::any_of(keywords.begin(), keywords.end(), [&](const auto& k) {
                               return name.find(k) != std::string::npos;
                           });
        if (named) out.push_back(s);
    }
    return out;
}

YClassification classify_y(const DailySeries& prcp, MissingPolicy policy, double max_missing) {
    YClassification out;
    out.station_id = prcp.station_id;
    std::size_t present = 0;
    std::size_t missing = 0;
    for (const auto& e : prcp.values) {
        if (e.state == EntryState::Absent) continue;
        ++present;
        if (e.state == EntryState::Missing) ++missing;
    }
    if (present == 0) throw DataError("classify_y: no days with an entry for " + prcp.station_id);
    out.missing_fraction = static_cast<double>(missing) / static_cast<double>(present);
    out.eligible = out.missing_fraction <= max_missing;
    std::vector<double> values;
    for (std::size_t i = 0; i < prcp.values.size(); ++i) {
        const Entry& e = prcp.values[i];
        if (e.state == EntryState::Absent) continue;
        if (e.state == EntryState::Missing && policy == MissingPolicy::Drop) continue;
        out.dates.push_back(prcp.dates[i]);
        values.push_back(e.state == EntryState::Value ? e.value : 0.0);
    }
    out.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return out;
}

XClassification classify_x(const DailySeries& tmax, const std::vector<Date>& y_dates, double min_missing,
                           double max_missing) {
    if (y_dates.empty()) throw DataError("classify_x: empty date range");
    XClassification out;
    out.station_id = tmax.station_id;
    const auto n = static_cast<Eigen::Index>(y_dates.size());
    out.values = Eigen::VectorXd::Zero(n);
    out.mask = Eigen::VectorXd::Zero(n);
    std::size_t missing = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Date d = y_dates[static_cast<std::size_t>(i)];
        const auto it = std::lower_bound(tmax.dates.begin(), tmax.dates.end(), d);
        if (it != tmax.dates.end() && *it == d) {
            const Entry& e = tmax.values[static_cast<std::size_t>(it - tmax.dates.begin())];
            if (e.state == EntryState::Value) {
                out.values[i] = e.value;
                out.mask[i] = 1.0;
                continue;
            }
        }
        ++missing;
    }
    out.missing_fraction = static_cast<double>(missing) / static_cast<double>(n);
    out.eligible = out.missing_fraction >= min_missing && out.missing_fraction <= max_missing;
    return out;
}

std::vector<TripletDataset> build_triplets(const std::vector<YWithX>& candidates) {
    std::vector<TripletDataset> out;
    for (const auto& c : candidates) {
        for (std::size_t a = 0; a < c.x.size(); ++a) {
            for (std::size_t b = a + 1; b < c.x.size(); ++b) {
                const auto& xa = c.x[a];
                const auto& xb = c.x[b];
                if (xa.values.size() != c.y.values.size() || xb.values.size() != c.y.values.size()) {
                    throw DataError("build_triplets: X series not aligned with Y");
                }
                TripletDataset t;
                t.y_station = c.y.station_id;
                t.x1_station = xa.station_id;
                t.x2_station = xb.station_id;
                t.dates = c.y.dates;
                t.y = c.y.values;
                t.x1 = xa.values;
                t.x2 = xb.values;
                t.m1 = xa.mask;
                t.m2 = xb.mask;
                out.push_back(std::move(t));
            }
        }
    }
    return out;
}

double chisq_upper_tail(double statistic, double df) {
    if (!(df > 0.0)) throw DomainError("chisq_upper_tail: df must be positive");
    if (!(statistic > 0.0)) return 1.0;
    return boost::math::gamma_q(df / 2.0, statistic / 2.0);
}

ChiSquareResult mask_stationarity_chisq(const Eigen::VectorXd& m1, const Eigen::VectorXd& m2,
                                        std::size_t n_windows) {
    if (m1.size() != m2.size()) throw DataError("chisq: masks differ in length");
    const auto n = static_cast<std::size_t>(m1.size());
    if (n_windows < 2 || n < n_windows) throw DomainError("chisq: need 2 <= n_windows <= n");
    ChiSquareResult out;
    out.table = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_windows), 4, 0.5);
    for (std::size_t w = 0; w < n_windows; ++w) {
        const std::size_t lo = w * n / n_windows;
        const std::size_t hi = (w + 1) * n / n_windows;
        for (std::size_t i = lo; i < hi; ++i) {
            const int cell = (m1[static_cast<Eigen::Index>(i)] != 0.0 ? 2 : 0) + (m2[static_cast<Eigen::Index>(i)] != 0.0 ? 1 : 0);
            out.table(static_cast<Eigen::Index>(w), cell) += 1.0;
        }
    }
    const Eigen::VectorXd rows = out.table.rowwise().sum();
    const Eigen::RowVectorXd cols = out.table.colwise().sum();
    const double total = rows.sum();
    for (Eigen::Index w = 0; w < out.table.rows(); ++w) {
        for (Eigen::Index c = 0; c < 4; ++c) {
            const double expected = rows[w] * cols[c] / total;
            const double d = out.table(w, c) - expected;
            out.statistic += d * d / expected;
        }
    }
    out.df = (n_windows - 1) * 3;
    out.p_value = chisq_upper_tail(out.statistic, static_cast<double>(out.df));
    return out;
}

std::vector<double> rolling_correlation(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, std::size_t window,
                                        const Eigen::VectorXd* m1, const Eigen::VectorXd* m2,
                                        std::size_t min_joint) {
    if (x1.size() != x2.size()) throw DataError("rolling_correlation: series differ in length");
    if ((m1 && m1->size() != x1.size()) || (m2 && m2->size() != x1.size())) {
        throw DataError("rolling_correlation: mask length mismatch");
    }
    const auto n = static_cast<std::size_t>(x1.size());
    if (window < 2 || n < window) throw DomainError("rolling_correlation: need 2 <= window <= n");
    std::vector<double> out;
    out.reserve(n - window + 1);
    for (std::size_t s = 0; s + window <= n; ++s) {
        double sa = 0, sb = 0;
        std::size_t count = 0;
        for (std::size_t i = s; i < s + window; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            if ((m1 && (*m1)[k] == 0.0) || (m2 && (*m2)[k] == 0.0)) continue;
            sa += x1[k];
            sb += x2[k];
            ++count;
        }
        if (count < std::max<std::size_t>(min_joint, 2)) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double ma = sa / static_cast<double>(count);
        const double mb = sb / static_cast<double>(count);
        double sab = 0, saa = 0, sbb = 0;
        for (std::size_t i = s; i < s + window; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            if ((m1 && (*m1)[k] == 0.0) || (m2 && (*m2)[k] == 0.0)) continue;
            const double da = x1[k] - ma;
            const double db = x2[k] - mb;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
        out.push_back(saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

namespace {

double value_range(const std::vector<double>& v) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double x : v) {
        if (std::isnan(x)) continue;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return hi >= lo ? hi - lo : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

Verdict admissibility(const TripletDataset& t, const AdmissibilitySettings& settings) {
    Verdict v;
    auto fail = [&](const char* gate, std::string reason) {
        v.failed_gate = gate;
        v.reasons.push_back(std::move(reason));
        return v;
    };
    const auto n = static_cast<std::size_t>(t.y.size());
    if (n == 0 || t.x1.size() != t.y.size() || t.x2.size() != t.y.size() || t.m1.size() != t.y.size() ||
        t.m2.size() != t.y.size() || t.dates.size() != n) {
        return fail("completeness", "series are not aligned on a common nonempty date index");
    }
    for (const auto* m : {&t.m1, &t.m2}) {
        const double missing = 1.0 - m->mean();
        if (missing < settings.x_min_missing || missing > settings.x_max_missing) {
            return fail("completeness", "X missing fraction " + std::to_string(missing) + " outside bounds");
        }
    }

    try {
        const ChiSquareResult chi = mask_stationarity_chisq(t.m1, t.m2, settings.chisq_windows);
        v.chisq_p = chi.p_value;
    } catch (const Error& e) {
        return fail("mask-stationarity", e.what());
    }
    if (v.chisq_p < settings.chisq_level) {
        return fail("mask-stationarity", "chi-square p-value " + std::to_string(v.chisq_p) + " below level");
    }

    if (settings.drift_gate) {
        const std::size_t w = settings.rolling_window;
        if (n < w) return fail("drift", "series shorter than the rolling window");
        std::vector<double> means;
        std::vector<double> sds;
        for (std::size_t s = 0; s + w <= n; ++s) {
            const Eigen::VectorXd seg = t.y.segment(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(w));
            const double m = seg.mean();
            means.push_back(m);
            sds.push_back(std::sqrt((seg.array() - m).square().sum() / static_cast<double>(w - 1)));
        }
        std::vector<double> sorted = sds;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
        const double median_sd = sorted[sorted.size() / 2];
        v.mean_drift = median_sd > 0.0 ? value_range(means) / median_sd : std::numeric_limits<double>::infinity();
        if (!(v.mean_drift <= settings.max_mean_drift)) {
            return fail("drift", "rolling-mean drift " + std::to_string(v.mean_drift) + " above bound");
        }
        const auto corr = rolling_correlation(t.x1, t.x2, w, &t.m1, &t.m2);
        v.corr_range = value_range(corr);
        if (!(v.corr_range <= settings.max_corr_range)) {
            return fail("drift", "rolling-correlation range " + std::to_string(v.corr_range) + " above bound");
        }
    }

    std::vector<double> yv(t.y.data(), t.y.data() + t.y.size());
    std::optional<PlateauSettings> ps;
    if (!settings.use_default_window) ps = settings.plateau;
    HillDiagnostics hd;
    try {
        hd = hill_diagnostics(yv, std::nullopt, ps);
    } catch (const Error& e) {
        return fail("heavy-tail", e.what());
    }
    if (!hd.plateau) return fail("heavy-tail", "no Hill plateau above gamma_min");
    v.gamma_hat = hd.plateau->gamma_mean;
    v.passed = true;
    return v;
}

}  // namespace epls::ghcn
