#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rtme/kernel.hpp"
#include "rtme/markov.hpp"

namespace rtme {

enum class RegMode { diagonal, weighted };

RegMode reg_mode_parse(const std::string& name);
std::string reg_mode_name(RegMode mode);

/// Repairs a candidate logarithm into a generator. Negative off-diagonal
/// entries are zeroed first; then either the diagonal absorbs the row sum
/// (diagonal mode) or every entry is shrunk proportionally to its magnitude
/// (weighted mode). Both modes are idempotent. Weighted mode throws
/// Error("NotGenerator") when the input diagonal is positive enough that no
/// valid generator comes out; callers fall back to diagonal mode.
GeneratorMatrix regularize_generator(const SquareMatrix& b, RegMode mode);

/// Streaming sums U_T(z, gap, i, j) and U_B(z, gap, i) over an evaluation
/// grid. Single writer; copy before reading concurrently. Estimates derived
/// from a bank never mutate it.
struct AccumulatorBank {
    // fixed configuration
    std::vector<CovariatePoint> grid;
    int states = 0;
    int max_gap = 0;
    KernelSpec kernel;
    BandwidthSchedule schedule;

    // running state
    std::uint64_t first_path_index = 1;  // global index of this bank's first path
    std::uint64_t n_paths = 0;           // paths absorbed into this bank
    double omega_sum = 0.0;              // sum of recursion weights w_m
    std::uint64_t skipped_transitions = 0;  // transitions with gap > max_gap
    std::vector<double> u_t;  // [grid][gap][from][to]
    std::vector<double> u_b;  // [grid][gap][from]

    AccumulatorBank(std::vector<CovariatePoint> grid, int states, int max_gap, KernelSpec kernel,
                    BandwidthSchedule schedule);

    std::size_t continuous_dim() const;

    double& ut(std::size_t g, int gap, int from, int to);
    double ut(std::size_t g, int gap, int from, int to) const;
    double& ub(std::size_t g, int gap, int from);
    double ub(std::size_t g, int gap, int from) const;

    /// Kernel weight of one path at one grid point, including the recursion
    /// weight w_m: w_m * h^-p * prod_q K((z_c[q]-g_c[q])/h) * 1{z_d == g_d}.
    /// Unconditional grid points match every path with weight w_m.
    double path_weight(const CovariatePoint& z, std::size_t g, std::uint64_t m) const;

    /// Absorbs one path as index m = first_path_index + n_paths. Transitions
    /// with gaps beyond max_gap are counted and skipped, not errors.
    void absorb(const SamplePath& path);

    /// Entrywise sum with a bank built over a disjoint path-index range
    /// (parallel shard ingestion). Throws Error("ShapeMismatch") unless
    /// grids, dimensions, kernel, schedule agree and the ranges are disjoint.
    void merge(const AccumulatorBank& other);

    bool compatible_with(const AccumulatorBank& other) const;
};

/// Estimated gap-transition matrix A_hat for one (grid point, gap). Rows
/// whose denominator mass falls below 1e-12 * omega_sum follow the 0/0 = 0
/// rule: they are all zero and flagged missing.
struct PowerEstimate {
    SquareMatrix matrix;
    std::vector<std::uint8_t> row_missing;

    bool all_missing() const;
    bool any_missing() const;
};

PowerEstimate power_estimate(const AccumulatorBank& bank, std::size_t grid_index, int gap);

/// Relative gap-frequency weights over gaps in [lag_lo, lag_hi]; they sum to
/// one. Throws Error("EmptyRange") when the whole range carries no mass.
std::vector<double> gap_weights(const AccumulatorBank& bank, std::size_t grid_index, int lag_lo,
                                int lag_hi);

/// One-step transition recovered from an ell-gap transition matrix:
/// exp(log(a)/ell), with the logarithm repaired into a generator when needed.
struct LagEstimate {
    StochasticMatrix one_step;
    GeneratorMatrix generator;  // generator form of log(a)
    bool regularized = false;   // true when the raw log was not a generator
};

LagEstimate transition_from_power(const StochasticMatrix& a, int ell, RegMode mode);

/// Convex combination of per-gap one-step estimates; weights need not be
/// normalized. Throws Error("NoUsableLag") when nothing usable is passed.
StochasticMatrix aggregate_transitions(
    const std::vector<std::pair<double, StochasticMatrix>>& weighted);

/// Full per-grid-point pipeline: A_hat per gap, generator log + repair,
/// per-gap one-step estimates, frequency weights, aggregation.
struct LagReport {
    int gap = 0;
    double weight_raw = 0.0;  // unnormalized frequency mass
    double weight = 0.0;      // normalized over usable gaps
    bool no_data = false;
    bool log_failed = false;
    bool regularized = false;
    std::vector<std::uint8_t> rows_missing;
    std::optional<StochasticMatrix> power;     // A_hat, missing rows completed
    std::optional<GeneratorMatrix> generator;  // log(A_hat) as a generator
    std::optional<StochasticMatrix> one_step;  // exp(generator/gap)
};

struct EstimateResult {
    CovariatePoint point;
    int lag_lo = 0;
    int lag_hi = 0;
    std::vector<LagReport> lags;
    std::optional<StochasticMatrix> aggregated;  // empty when no lag was usable
    std::vector<std::string> warnings;
};

EstimateResult estimate_point(const AccumulatorBank& bank, std::size_t grid_index, int lag_lo,
                              int lag_hi, RegMode mode);

/// Plug-in quantities for the closed-form optimal bandwidth constant.
struct BandwidthPlugin {
    double density_value = 0.0;   // G(z), the local joint density value
    double trace_hessian = 0.0;   // trace of the Hessian of G at z
    double kernel_l2 = 0.0;       // integral of K^2
    double kernel_mu2 = 0.0;      // integral of u^2 K(u)
    double max_window = 0.0;      // L, the observation window length
};

/// Closed-form c_opt(beta; alpha, z) for alpha = 1/(p+4). Throws
/// Error("DegenerateHessian") when trace_hessian is zero.
double optimal_bandwidth_constant(double beta, double alpha, int p, const BandwidthPlugin& plugin);

/// Shrink factor c_r(beta) relating the recursive optimal bandwidth to the
/// batch one; always below 1.
double recursive_shrink_factor(double beta, int p);

}  // namespace rtme
