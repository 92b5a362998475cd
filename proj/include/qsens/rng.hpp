#pragma once

#include <cstdint>
#include <random>

namespace qsens {

/// Inverse standard normal CDF (Wichura's algorithm, ~1e-15 relative error).
double normal_quantile(double p);

/// Deterministic random stream with counter-based substreams.
///
/// A master seed plus a substream counter fully determine every draw, so
/// per-replicate streams are reproducible regardless of execution order.
/// All draws go through explicit integer/bit arithmetic rather than
/// std::*_distribution, which keeps sequences identical across standard
/// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream derived from (seed, index); does not disturb *this.
    Rng substream(std::uint64_t index) const;

    std::uint64_t next_u64();

    /// Uniform draw strictly inside (0,1).
    double uniform01();

    /// Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
    std::size_t uniform_below(std::size_t n);

    /// Standard normal via inverse-CDF transform of uniform01().
    double normal();

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace qsens
