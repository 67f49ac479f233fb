#pragma once

#include <cstdint>

namespace rtme {

/// Deterministic splittable RNG. Each stream is a splitmix64 sequence whose
/// starting state is derived by hashing (seed, a, b), so per-path substreams
/// are reproducible regardless of generation order.
class Rng {
public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    static std::uint64_t mix(std::uint64_t x);
    static Rng keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double next_unit();

    /// Unbiased uniform integer on {0, ..., n-1}.
    std::uint64_t next_below(std::uint64_t n);

    bool bernoulli(double q) { return next_unit() < q; }

    /// Poisson via Knuth's product method, chunked for large means.
    std::int64_t poisson(double mean);

    /// Beta(a, b) for integer a, b >= 1, drawn exactly as the a-th order
    /// statistic of a+b-1 uniforms.
    double beta(int a, int b);

private:
    std::uint64_t state_;
};

}  // namespace rtme
