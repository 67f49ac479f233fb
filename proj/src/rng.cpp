#include "rtme/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rtme/error.hpp"

namespace rtme {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::mix(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng Rng::keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t k = mix(seed);
    k = mix(k ^ (a + 0xC2B2AE3D27D4EB4FULL));
    k = mix(k ^ (b + 0x165667B19E3779F9ULL));
    return Rng(k);
}

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw argument_error("BadArgument", "next_below requires n >= 1");
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

std::int64_t Rng::poisson(double mean) {
    if (!(mean > 0.0)) throw argument_error("BadArgument", "Poisson mean must be positive");
    std::int64_t total = 0;
    double remaining = mean;
    // Knuth's method underflows for large means; draw in chunks of <= 30.
    while (remaining > 0.0) {
        const double lambda = std::min(remaining, 30.0);
        remaining -= lambda;
        const double limit = std::exp(-lambda);
        std::int64_t k = 0;
        double prod = 1.0;
        do {
            ++k;
            prod *= next_unit();
        } while (prod > limit);
        total += k - 1;
    }
    return total;
}

double Rng::beta(int a, int b) {
    if (a < 1 || b < 1)
        throw config_error("InvalidConfig", "Beta parameters must be integers >= 1");
    const int n = a + b - 1;
    std::vector<double> u(static_cast<std::size_t>(n));
    for (double& x : u) x = next_unit();
    std::sort(u.begin(), u.end());
    return u[static_cast<std::size_t>(a - 1)];
}

}  // namespace rtme
