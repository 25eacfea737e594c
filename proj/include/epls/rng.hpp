#pragma once

#include <cstdint>
#include <random>

namespace epls {

/// Derive an independent stream seed from a base seed and a stream index
/// (SplitMix64 finalizer applied twice). Used for per-replication seeds.
[[nodiscard]] std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Seedable 64-bit generator with the handful of variates this project needs.
///
/// All variates are derived from raw 64-bit outputs with fixed formulas, so a
/// stream is reproducible across standard library implementations (unlike the
/// std:: distributions, whose algorithms are unspecified).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    [[nodiscard]] Rng split(std::uint64_t stream) const { return Rng(split_seed(seed_of_split(), stream)); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal();

    /// Uniform integer in [0, n), n > 0, without modulo bias.
    std::uint64_t below(std::uint64_t n);

private:
    [[nodiscard]] std::uint64_t seed_of_split() const;

    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace epls
