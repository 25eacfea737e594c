#pragma once

// Fixture builders shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "epls/ghcn.hpp"
#include "epls/rng.hpp"

namespace epls::testing {

inline ghcn::Date day0() { return *ghcn::parse_date("2020-01-01"); }

// Masks whose joint pattern counts are identical in every block of `block`
// days; only the order inside a block is random.
inline void balanced_masks(std::size_t n, std::size_t block, Rng& rng, Eigen::VectorXd& m1, Eigen::VectorXd& m2) {
    m1.resize(static_cast<Eigen::Index>(n));
    m2.resize(static_cast<Eigen::Index>(n));
    std::vector<int> pattern(block);
    for (std::size_t i = 0; i < block; ++i) {
        // 10% missing on each coordinate, 2% on both
        const std::size_t r = i * 50 / block;
        pattern[i] = r == 0 ? 0 : (r < 5 ? 1 : (r < 9 ? 2 : 3));
    }
    for (std::size_t start = 0; start < n; start += block) {
        for (std::size_t i = block; i > 1; --i) std::swap(pattern[i - 1], pattern[rng.below(i)]);
        for (std::size_t i = 0; i < block && start + i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(start + i);
            m1(k) = (pattern[i] & 2) ? 1.0 : 0.0;
            m2(k) = (pattern[i] & 1) ? 1.0 : 0.0;
        }
    }
}

enum class TailKind { Pareto, Exponential };

// A triplet with i.i.d. responses, independent Gaussian covariates and masks
// that are either block-balanced or switch regime halfway through.
inline ghcn::TripletDataset synthetic_triplet(std::size_t n, std::uint64_t seed, TailKind tail = TailKind::Pareto,
                                              bool stationary = true, double gamma = 0.35) {
    Rng rng(seed);
    ghcn::TripletDataset t;
    t.y_station = "USW00000001";
    t.x1_station = "USW00000002";
    t.x2_station = "USW00000003";
    const auto len = static_cast<Eigen::Index>(n);
    t.y.resize(len);
    t.x1.resize(len);
    t.x2.resize(len);
    for (Eigen::Index i = 0; i < len; ++i) {
        t.dates.push_back(day0() + std::chrono::days{i});
        const double u = rng.uniform_open();
        t.y(i) = tail == TailKind::Pareto ? std::pow(u, -gamma) : -std::log(u);
        t.x1(i) = 20.0 + 5.0 * rng.normal();
        t.x2(i) = 20.0 + 5.0 * rng.normal();
    }
    balanced_masks(n, 100, rng, t.m1, t.m2);
    if (!stationary) {
        // same marginal missing rates, but the misses move from m1-only to joint
        for (Eigen::Index i = 0; i < len; ++i) {
            const bool late = i >= len / 2;
            const bool miss = (i % 10) == 0;
            t.m1(i) = miss ? 0.0 : 1.0;
            t.m2(i) = (miss && late) || (!late && (i % 10) == 5) ? 0.0 : 1.0;
        }
    }
    for (Eigen::Index i = 0; i < len; ++i) {
        if (t.m1(i) == 0.0) t.x1(i) = 0.0;
        if (t.m2(i) == 0.0) t.x2(i) = 0.0;
    }
    return t;
}

}  // namespace epls::testing
