#include "epls/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "epls/error.hpp"

namespace epls::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw DataError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("cannot write " + path.string());
}

std::size_t CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing CSV column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    bool first = true;
    std::size_t number = 0;
    while (!text.empty()) {
        const std::size_t end = text.find('\n');
        std::string_view line = text.substr(0, end);
        text.remove_prefix(end == std::string_view::npos ? text.size() : end + 1);
        ++number;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size()) {
                throw DataError("CSV line " + std::to_string(number) + " has " + std::to_string(fields.size()) +
                                " fields, expected " + std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) throw DataError("CSV input is empty");
    return table;
}

std::string join_csv(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    out += '\n';
    return out;
}

std::string sample_csv(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const MaskMatrix& lambda) {
    if (x.rows() != y.size() || lambda.rows() != x.rows() || lambda.cols() != x.cols()) {
        throw DataError("sample_csv: shape mismatch");
    }
    std::string out = "y";
    for (Eigen::Index j = 0; j < x.cols(); ++j) out += ",x" + std::to_string(j + 1);
    for (Eigen::Index j = 0; j < x.cols(); ++j) out += ",lambda_" + std::to_string(j + 1);
    out += '\n';
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        out += format_double(y[i]);
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            out += ',';
            if (lambda(i, j) != 0.0) out += format_double(x(i, j));
        }
        for (Eigen::Index j = 0; j < x.cols(); ++j) out += lambda(i, j) != 0.0 ? ",1" : ",0";
        out += '\n';
    }
    return out;
}

ObservedSample parse_sample_csv(std::string_view text) {
    const CsvTable t = parse_csv(text);
    const std::size_t ycol = t.column("y");
    std::vector<std::size_t> xcols;
    std::vector<std::size_t> lcols;
    for (std::size_t j = 1;; ++j) {
        const auto it = std::find(t.header.begin(), t.header.end(), "x" + std::to_string(j));
        if (it == t.header.end()) break;
        xcols.push_back(static_cast<std::size_t>(it - t.header.begin()));
        const auto lt = std::find(t.header.begin(), t.header.end(), "lambda_" + std::to_string(j));
        if (lt != t.header.end()) lcols.push_back(static_cast<std::size_t>(lt - t.header.begin()));
    }
    if (xcols.empty()) throw DataError("sample CSV has no x columns");
    const bool explicit_mask = !lcols.empty();
    if (explicit_mask && lcols.size() != xcols.size()) throw DataError("sample CSV: lambda columns do not match x");
    ObservedSample s;
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    const auto p = static_cast<Eigen::Index>(xcols.size());
    s.y.resize(n);
    s.x = Eigen::MatrixXd::Zero(n, p);
    s.lambda = MaskMatrix::Zero(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        s.y[i] = parse_double(row[ycol]);
        if (!std::isfinite(s.y[i])) throw DataError("sample CSV: non-finite y in row " + std::to_string(i + 1));
        for (Eigen::Index j = 0; j < p; ++j) {
            const std::string& cell = row[xcols[static_cast<std::size_t>(j)]];
            if (explicit_mask) {
                const double l = parse_double(row[lcols[static_cast<std::size_t>(j)]]);
                if (l != 0.0 && l != 1.0) throw DataError("sample CSV: lambda entries must be 0 or 1");
                if (l == 0.0) continue;
                if (cell.empty()) throw DataError("sample CSV: observed x cell is empty");
            }
            if (cell.empty()) continue;
            s.x(i, j) = parse_double(cell);
            if (std::isnan(s.x(i, j))) {
                s.x(i, j) = 0.0;
                continue;
            }
            s.lambda(i, j) = 1.0;
        }
    }
    return s;
}

std::string truth_csv(const Eigen::VectorXd& beta) {
    std::string out = "j,beta_true,beta_true_unit\n";
    const Eigen::VectorXd unit = beta / beta.norm();
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        out += join_csv({std::to_string(j + 1), format_double(beta[j]), format_double(unit[j])});
    }
    return out;
}

std::string panel_csv(const PanelResult& r) {
    std::string out = "j,beta_true,beta_true_unit,mean,q05,q95\n";
    for (Eigen::Index j = 0; j < r.beta_true.size(); ++j) {
        out += join_csv({std::to_string(j + 1), format_double(r.beta_true[j]), format_double(r.beta_true_unit[j]),
                         format_double(r.mean_beta[j]), format_double(r.q05_beta[j]), format_double(r.q95_beta[j])});
    }
    return out;
}

Json panel_summary(const PanelResult& r) {
    Json j;
    j["id"] = r.config.id;
    j["figure"] = r.config.figure;
    j["setup"] = to_string(r.config.gen.setup);
    j["gamma"] = r.config.gen.burr.gamma;
    j["rho"] = r.config.gen.burr.rho;
    j["tau"] = r.config.mask.tau;
    j["kappa"] = r.config.gen.kappa;
    j["n"] = r.config.gen.n;
    j["p"] = r.config.gen.p;
    j["seed"] = r.config.gen.seed;
    j["reps"] = r.reps;
    j["excluded"] = r.excluded;
    j["exclusion_reasons"] = r.exclusion_reasons;
    j["mean_cosine"] = r.mean_cosine;
    j["median_cosine"] = r.median_cosine;
    j["cosines"] = r.cosines;
    Json hist = Json::object();
    for (const auto& [k, c] : r.k_hat_histogram) hist[std::to_string(k)] = c;
    j["k_hat_histogram"] = hist;
    return j;
}

std::string ranks_csv(const RankTable& table) {
    std::string out = "dataset,alpha,method,tailcov,rank\n";
    for (const auto& row : table.rows) {
        out += join_csv({row.dataset, format_double(row.alpha), to_string(row.method), format_double(row.tailcov),
                         format_double(row.rank)});
    }
    return out;
}

std::string mean_ranks_csv(const RankTable& table) {
    std::string out = "method,alpha,mean_rank,count\n";
    for (const auto& m : table.mean_ranks) {
        out += join_csv({to_string(m.method), format_double(m.alpha), format_double(m.mean_rank),
                         std::to_string(m.count)});
    }
    return out;
}

std::string tailcov_csv(const TailCovCurve& curve) {
    std::vector<std::string> header{"k", "threshold"};
    for (const auto& [m, values] : curve.methods) header.push_back(to_string(m));
    header.emplace_back("random_min");
    header.emplace_back("random_max");
    std::string out = join_csv(header);
    for (std::size_t i = 0; i < curve.k.size(); ++i) {
        std::vector<std::string> row{std::to_string(curve.k[i]), format_double(curve.threshold[i])};
        for (const auto& [m, values] : curve.methods) row.push_back(format_double(values[i]));
        row.push_back(format_double(curve.random_min[i]));
        row.push_back(format_double(curve.random_max[i]));
        out += join_csv(row);
    }
    return out;
}

Json direction_json(const Direction& d) {
    Json j;
    j["method"] = d.method;
    j["beta_hat"] = std::vector<double>(d.beta_hat.data(), d.beta_hat.data() + d.beta_hat.size());
    j["threshold"] = d.threshold;
    j["k"] = d.k ? Json(*d.k) : Json(nullptr);
    j["tail_cov"] = d.tail_cov ? Json(*d.tail_cov) : Json(nullptr);
    j["flagged"] = d.flagged;
    j["pinv_fallback"] = d.pinv_fallback;
    return j;
}

Json threshold_json(const ThresholdSelection& sel) {
    Json j;
    j["k_hat"] = sel.k_hat;
    j["threshold"] = sel.threshold;
    j["k_min"] = sel.k_min;
    j["k_max"] = sel.k_max;
    j["r_bar"] = sel.r_bar;
    j["skipped"] = sel.skipped;
    return j;
}

std::string triplet_csv(const ghcn::TripletDataset& t) {
    std::string out = "date,y,x1,x2,m1,m2\n";
    for (std::size_t i = 0; i < t.dates.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out += join_csv({ghcn::format_date(t.dates[i]), format_double(t.y[k]),
                         t.m1[k] != 0.0 ? format_double(t.x1[k]) : "", t.m2[k] != 0.0 ? format_double(t.x2[k]) : "",
                         t.m1[k] != 0.0 ? "1" : "0", t.m2[k] != 0.0 ? "1" : "0"});
    }
    return out;
}

ghcn::TripletDataset parse_triplet_csv(std::string_view text, const std::string& name) {
    const CsvTable t = parse_csv(text);
    const std::size_t cd = t.column("date"), cy = t.column("y"), c1 = t.column("x1"), c2 = t.column("x2"),
                      cm1 = t.column("m1"), cm2 = t.column("m2");
    ghcn::TripletDataset out;
    const std::size_t first = name.find('_');
    const std::size_t second = first == std::string::npos ? std::string::npos : name.find('_', first + 1);
    if (second != std::string::npos) {
        out.y_station = name.substr(0, first);
        out.x1_station = name.substr(first + 1, second - first - 1);
        out.x2_station = name.substr(second + 1);
    } else {
        out.y_station = name;
    }
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    out.y.resize(n);
    out.x1 = out.x2 = Eigen::VectorXd::Zero(n);
    out.m1.resize(n);
    out.m2.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        const auto date = ghcn::parse_date(row[cd]);
        if (!date) throw DataError("triplet CSV: bad date '" + row[cd] + "'");
        if (!out.dates.empty() && !(out.dates.back() < *date)) throw DataError("triplet CSV: dates not increasing");
        out.dates.push_back(*date);
        out.y[i] = parse_double(row[cy]);
        out.m1[i] = parse_double(row[cm1]) != 0.0 ? 1.0 : 0.0;
        out.m2[i] = parse_double(row[cm2]) != 0.0 ? 1.0 : 0.0;
        if (out.m1[i] != 0.0) out.x1[i] = parse_double(row[c1]);
        if (out.m2[i] != 0.0) out.x2[i] = parse_double(row[c2]);
    }
    return out;
}

RankDataset to_rank_dataset(const ghcn::TripletDataset& t) {
    RankDataset d;
    d.name = t.name();
    d.y = t.y;
    d.x.resize(t.y.size(), 2);
    d.x.col(0) = t.x1;
    d.x.col(1) = t.x2;
    d.lambda.resize(t.y.size(), 2);
    d.lambda.col(0) = t.m1;
    d.lambda.col(1) = t.m2;
    return d;
}

std::string series_csv(const std::vector<ghcn::DailySeries>& series) {
    std::string out = "station,element,date,status,value\n";
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.dates.size(); ++i) {
            const ghcn::Entry& e = s.values[i];
            if (e.state == ghcn::EntryState::Absent) continue;
            const bool value = e.state == ghcn::EntryState::Value;
            out += join_csv({s.station_id, ghcn::to_string(s.element), ghcn::format_date(s.dates[i]),
                             value ? "value" : "missing", value ? format_double(e.value) : ""});
        }
    }
    return out;
}

std::vector<ghcn::DailySeries> parse_series_csv(std::string_view text) {
    const CsvTable t = parse_csv(text);
    const std::size_t cs = t.column("station"), ce = t.column("element"), cd = t.column("date"),
                      cst = t.column("status"), cv = t.column("value");
    std::map<std::pair<std::string, ghcn::Element>, std::map<ghcn::Date, ghcn::Entry>> grouped;
    for (const auto& row : t.rows) {
        const auto element = ghcn::element_from_string(row[ce]);
        if (!element) throw DataError("series CSV: unknown element '" + row[ce] + "'");
        const auto date = ghcn::parse_date(row[cd]);
        if (!date) throw DataError("series CSV: bad date '" + row[cd] + "'");
        ghcn::Entry e;
        if (row[cst] == "value") {
            e.state = ghcn::EntryState::Value;
            e.value = parse_double(row[cv]);
        } else if (row[cst] == "missing") {
            e.state = ghcn::EntryState::Missing;
        } else {
            throw DataError("series CSV: unknown status '" + row[cst] + "'");
        }
        grouped[{row[cs], *element}][*date] = e;
    }
    std::vector<ghcn::DailySeries> out;
    for (const auto& [key, days] : grouped) {
        ghcn::DailySeries s;
        s.station_id = key.first;
        s.element = key.second;
        // omitted days inside the covered range are Absent
        for (ghcn::Date d = days.begin()->first; d <= days.rbegin()->first; d += std::chrono::days{1}) {
            const auto it = days.find(d);
            s.dates.push_back(d);
            s.values.push_back(it == days.end() ? ghcn::Entry{} : it->second);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::uint64_t config_hash(const Json& config) { return fnv1a64(config.dump()); }

Json manifest_json(const RunManifest& m) {
    Json j;
    j["tool_version"] = m.tool_version;
    j["base_seed"] = m.base_seed;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash(m.config)));
    j["config_hash"] = hex;
    j["config"] = m.config;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["wall_clock_seconds"] = m.wall_clock_seconds;
    j["diagnostics"] = m.diagnostics;
    return j;
}

}  // namespace epls::io
