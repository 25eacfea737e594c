#include "epls/competitors.hpp"

#include <algorithm>
#include <numeric>

#include "epls/error.hpp"

namespace epls {

namespace {

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    return centered.transpose() * centered / static_cast<double>(x.rows());
}

Eigen::MatrixXd pinv_symmetric(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double tol = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff())) *
                       static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i]) > tol) inv[i] = 1.0 / ev[i];
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Direction make_direction(const char* method, Eigen::VectorXd v, double threshold) {
    Direction d;
    d.method = method;
    d.beta_hat = std::move(v);
    d.threshold = threshold;
    return d;
}

Direction sir_core(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SirSettings& settings,
                   const char* method, double threshold) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (settings.slices < 1) throw ConfigError("sir: slice count must be positive");
    if (n < 2 || n < std::min<std::size_t>(settings.slices, 2)) {
        throw InsufficientTailError(std::string(method) + ": need at least 2 observations");
    }
    const std::size_t h = std::min(settings.slices, n);
    const auto labels = equal_frequency_slices(std::span<const double>(y.data(), n), h);
    const SliceSummary slices = summarize_slices(x, labels, h);

    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd sxx = covariance(x);
    Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    for (std::size_t s = 0; s < slices.counts.size(); ++s) {
        const Eigen::VectorXd d = slices.slice_means.col(static_cast<Eigen::Index>(s)) - mean.transpose();
        sb += static_cast<double>(slices.counts[s]) / static_cast<double>(n) * d * d.transpose();
    }
    if (sb.isZero(0.0)) throw DegenerateError(std::string(method) + ": between-slice covariance is zero");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sxx_eig(sxx, Eigen::EigenvaluesOnly);
    const double max_ev = sxx_eig.eigenvalues().maxCoeff();
    const double min_ev = sxx_eig.eigenvalues().minCoeff();
    Eigen::VectorXd v;
    bool fallback = false;
    if (max_ev > 0.0 && min_ev > 1e-12 * max_ev) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sb, sxx);
        if (ges.info() != Eigen::Success) throw DegenerateError(std::string(method) + ": eigensolver failed");
        v = ges.eigenvectors().col(x.cols() - 1);
    } else {
        if (!settings.allow_pinv) throw DegenerateError(std::string(method) + ": singular covariance of X");
        if (!(max_ev > 0.0)) throw DegenerateError(std::string(method) + ": covariance of X is zero");
        const Eigen::MatrixXd m = pinv_symmetric(sxx) * sb;
        Eigen::EigenSolver<Eigen::MatrixXd> es(m);
        Eigen::Index best = 0;
        es.eigenvalues().real().maxCoeff(&best);
        v = es.eigenvectors().col(best).real();
        fallback = true;
    }
    const double norm = v.norm();
    if (!(norm > 0.0)) throw DegenerateError(std::string(method) + ": zero direction");
    v /= norm;
    apply_sign_convention(v);
    Direction d = make_direction(method, std::move(v), threshold);
    d.pinv_fallback = fallback;
    return d;
}

}  // namespace

std::vector<std::size_t> equal_frequency_slices(std::span<const double> values, std::size_t h) {
    const std::size_t n = values.size();
    if (h < 1) throw ConfigError("equal_frequency_slices: need at least one slice");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::size_t> labels(n);
    std::size_t run_label = 0;
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t nominal = r * h / n;
        if (r == 0 || values[order[r]] != values[order[r - 1]]) run_label = nominal;
        labels[order[r]] = run_label;
    }
    return labels;
}

SliceSummary summarize_slices(const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels, std::size_t h) {
    if (labels.size() != static_cast<std::size_t>(x.rows())) throw DataError("summarize_slices: size mismatch");
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(x.cols(), static_cast<Eigen::Index>(h));
    std::vector<std::size_t> counts(h, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= h) throw DataError("summarize_slices: label out of range");
        sums.col(static_cast<Eigen::Index>(labels[i])) += x.row(static_cast<Eigen::Index>(i)).transpose();
        ++counts[labels[i]];
    }
    SliceSummary out;
    out.total = labels.size();
    for (std::size_t s = 0; s < h; ++s) {
        if (counts[s] > 0) out.slice_ids.push_back(s);
    }
    out.slice_means.resize(x.cols(), static_cast<Eigen::Index>(out.slice_ids.size()));
    for (std::size_t s = 0; s < out.slice_ids.size(); ++s) {
        const std::size_t id = out.slice_ids[s];
        out.slice_means.col(static_cast<Eigen::Index>(s)) =
            sums.col(static_cast<Eigen::Index>(id)) / static_cast<double>(counts[id]);
        out.counts.push_back(counts[id]);
    }
    return out;
}

void apply_sign_convention(Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) {
            if (v[i] < 0.0) v = -v;
            return;
        }
    }
}

TailSample tail_sample(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold) {
    if (x.rows() != y.size()) throw DataError("tail_sample: x rows and y length differ");
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] > threshold) rows.push_back(i);
    }
    TailSample out;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.x.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
        out.y[static_cast<Eigen::Index>(r)] = y[rows[r]];
    }
    return out;
}

Direction epca_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold) {
    const TailSample tail = tail_sample(x, y, threshold);
    if (tail.y.size() < 2) throw InsufficientTailError("epca: fewer than 2 exceedances");
    const Eigen::MatrixXd cov = covariance(tail.x);
    if (cov.isZero(0.0)) throw DegenerateError("epca: tail covariance is zero");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd v = es.eigenvectors().col(x.cols() - 1);
    v.normalize();
    apply_sign_convention(v);
    return make_direction("epca", std::move(v), threshold);
}

Direction elda_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold, std::size_t k) {
    if (k < 2) throw ConfigError("elda: need at least 2 slices");
    const TailSample tail = tail_sample(x, y, threshold);
    const auto n_tail = static_cast<std::size_t>(tail.y.size());
    if (n_tail < k) throw InsufficientTailError("elda: fewer exceedances than slices");
    const Eigen::VectorXd severity = tail.y.array() - threshold;
    const auto labels = equal_frequency_slices(std::span<const double>(severity.data(), n_tail), k);
    const SliceSummary slices = summarize_slices(tail.x, labels, k);
    if (slices.counts.size() != k) throw InsufficientTailError("elda: a slice is empty after tie handling");

    const auto kk = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd delta =
        slices.slice_means.col(kk - 1) - slices.slice_means.leftCols(kk - 1).rowwise().sum() / static_cast<double>(k - 1);
    if (delta.isZero(0.0)) throw DegenerateError("elda: slice means coincide");
    Eigen::VectorXd v = pinv_symmetric(covariance(tail.x)) * delta;
    const double norm = v.norm();
    if (!(norm > 0.0)) throw DegenerateError("elda: zero direction");
    return make_direction("elda", v / norm, threshold);
}

Direction sir_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SirSettings& settings) {
    if (x.rows() != y.size()) throw DataError("sir: x rows and y length differ");
    return sir_core(x, y, settings, "sir", std::numeric_limits<double>::quiet_NaN());
}

Direction esir_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold,
                         const SirSettings& settings) {
    const TailSample tail = tail_sample(x, y, threshold);
    return sir_core(tail.x, tail.y, settings, "esir", threshold);
}

Direction erf_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double threshold,
                        const ForestSettings& settings) {
    if (x.rows() != y.size()) throw DataError("erf: x rows and y length differ");
    std::vector<bool> labels(static_cast<std::size_t>(y.size()));
    std::size_t positives = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        labels[static_cast<std::size_t>(i)] = y[i] >= threshold;
        positives += labels[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    if (positives == 0 || positives == labels.size()) throw DegenerateError("erf: labels have a single class");
    const ForestFit fit = fit_forest_importance(x, labels, settings);
    const double norm = fit.importance.norm();
    if (!(norm > 0.0)) throw DegenerateError("erf: forest made no split");
    return make_direction("erf", fit.importance / norm, threshold);
}

RandomDirections random_directions(std::size_t p, std::size_t m, Rng& rng) {
    if (p < 1 || m < 1) throw ConfigError("random_directions: p and m must be positive");
    RandomDirections out;
    out.directions.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
    for (Eigen::Index c = 0; c < out.directions.cols(); ++c) {
        double norm = 0.0;
        do {
            for (Eigen::Index r = 0; r < out.directions.rows(); ++r) out.directions(r, c) = rng.normal();
            norm = out.directions.col(c).norm();
        } while (!(norm > 0.0));
        out.directions.col(c) /= norm;
    }
    out.mean = out.directions.rowwise().mean();
    return out;
}

}  // namespace epls
