#include "epls/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "epls/error.hpp"
#include "epls/parallel.hpp"
#include "epls/rng.hpp"

namespace epls {

namespace {

double gini(double positives, double total) {
    if (total <= 0.0) return 0.0;
    const double q = positives / total;
    return 2.0 * q * (1.0 - q);
}

struct Node {
    std::vector<std::size_t> rows;
    std::size_t depth;
};

struct TreeResult {
    Eigen::VectorXd raw;
    std::size_t splits = 0;
};

TreeResult grow_tree(const Eigen::MatrixXd& x, const std::vector<bool>& labels, const ForestSettings& settings,
                     Rng& rng) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto p = static_cast<std::size_t>(x.cols());
    TreeResult out;
    out.raw = Eigen::VectorXd::Zero(x.cols());

    std::vector<std::size_t> sample(n);
    if (settings.bootstrap) {
        for (auto& s : sample) s = static_cast<std::size_t>(rng.below(n));
    } else {
        std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    const double total = static_cast<double>(sample.size());

    std::vector<std::size_t> features(p);
    std::iota(features.begin(), features.end(), std::size_t{0});
    const std::size_t n_features =
        settings.max_features == 0 ? p : std::min(settings.max_features, p);

    std::vector<Node> stack;
    stack.push_back({std::move(sample), 0});
    std::vector<std::size_t> order;
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        const std::size_t size = node.rows.size();
        double pos = 0.0;
        for (auto r : node.rows) pos += labels[r] ? 1.0 : 0.0;
        const double node_gini = gini(pos, static_cast<double>(size));
        if (node_gini == 0.0 || size < 2 * settings.min_leaf) continue;
        if (settings.max_depth && node.depth >= *settings.max_depth) continue;

        if (n_features < p) {
            for (std::size_t i = 0; i < n_features; ++i) {
                const auto j = i + static_cast<std::size_t>(rng.below(p - i));
                std::swap(features[i], features[j]);
            }
        }

        double best = std::numeric_limits<double>::infinity();
        std::size_t best_feature = 0;
        double best_cut = 0.0;
        for (std::size_t f = 0; f < n_features; ++f) {
            const std::size_t feat = features[f];
            order = node.rows;
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return x(a, feat) < x(b, feat); });
            double left_pos = 0.0;
            for (std::size_t i = 1; i < size; ++i) {
                left_pos += labels[order[i - 1]] ? 1.0 : 0.0;
                if (i < settings.min_leaf || size - i < settings.min_leaf) continue;
                const double lo = x(order[i - 1], feat);
                const double hi = x(order[i], feat);
                if (!(lo < hi)) continue;
                const double nl = static_cast<double>(i);
                const double nr = static_cast<double>(size - i);
                const double score = nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr);
                if (score < best) {
                    best = score;
                    best_feature = feat;
                    best_cut = lo + (hi - lo) / 2.0;
                }
            }
        }
        if (!std::isfinite(best)) continue;

        out.raw[static_cast<Eigen::Index>(best_feature)] += (static_cast<double>(size) * node_gini - best) / total;
        ++out.splits;
        Node left{{}, node.depth + 1};
        Node right{{}, node.depth + 1};
        for (auto r : node.rows) (x(r, best_feature) <= best_cut ? left : right).rows.push_back(r);
        stack.push_back(std::move(right));
        stack.push_back(std::move(left));
    }
    return out;
}

}  // namespace

ForestFit fit_forest_importance(const Eigen::MatrixXd& x, const std::vector<bool>& labels,
                                const ForestSettings& settings) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw DataError("forest: x rows and labels differ");
    if (x.rows() < 2 || x.cols() < 1) throw DataError("forest: need at least 2 rows and 1 feature");
    if (settings.n_trees < 1) throw ConfigError("forest: n_trees must be positive");
    if (settings.min_leaf < 1) throw ConfigError("forest: min_leaf must be positive");

    std::vector<TreeResult> trees(settings.n_trees);
    parallel_for(settings.n_trees, settings.jobs, [&](std::size_t t) {
        Rng rng(split_seed(settings.seed, t));
        trees[t] = grow_tree(x, labels, settings, rng);
    });

    ForestFit fit;
    fit.importance = Eigen::VectorXd::Zero(x.cols());
    fit.raw_importance = Eigen::VectorXd::Zero(x.cols());
    for (const auto& tree : trees) {
        fit.raw_importance += tree.raw;
        fit.n_splits += tree.splits;
        const double sum = tree.raw.sum();
        if (sum > 0.0) fit.importance += tree.raw / sum;
    }
    const auto count = static_cast<double>(trees.size());
    fit.raw_importance /= count;
    const double sum = fit.importance.sum();
    if (sum > 0.0) fit.importance /= sum;
    return fit;
}

}  // namespace epls
