#pragma once

#include <cstdint>
#include <string>

namespace rtme {

enum class KernelKind { gaussian, epanechnikov, triangular };

/// Univariate smoothing kernel. The Gaussian is admitted alongside the
/// compactly supported ones; in practice its tails act as compact support.
struct KernelSpec {
    KernelKind kind = KernelKind::gaussian;

    double operator()(double u) const;
    double l2_norm() const;        // integral of K^2
    double second_moment() const;  // integral of u^2 K(u)

    static KernelSpec parse(const std::string& name);
    std::string name() const;

    bool operator==(const KernelSpec&) const = default;
};

/// Per-path bandwidth h_m = c * sigma_scale * m^-alpha and recursion weight
/// w_m = m^beta, with m the 1-based path index.
struct BandwidthSchedule {
    double c = 1.0;
    double alpha = 0.2;
    double beta = 0.0;
    double sigma_scale = 1.0;

    double bandwidth(std::uint64_t m) const;
    double weight(std::uint64_t m) const;

    /// Checks c > 0, sigma_scale > 0, and (for p >= 1) alpha in (0, 1/p),
    /// 0 <= beta <= alpha*p. With no continuous covariates beta must be 0.
    void validate(std::size_t p) const;

    bool operator==(const BandwidthSchedule&) const = default;
};

}  // namespace rtme
