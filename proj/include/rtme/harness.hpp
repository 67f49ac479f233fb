#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rtme/config.hpp"
#include "rtme/simulator.hpp"

namespace rtme {

/// Replicated simulate-then-estimate experiment over a ladder of sample
/// sizes, evaluated against the known ground truth.
struct ExperimentSpec {
    SimConfig sim;              // paths is overridden by each entry of n_values
    EstimatorConfig estimator;  // estimator.grid is the evaluation grid
    std::vector<std::int64_t> n_values;
    int replications = 1;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

struct ErrorRecord {
    int replication = 0;
    std::int64_t n = 0;
    std::size_t grid_index = 0;
    CovariatePoint point;
    double spectral_error = 0.0;  // NaN when failed
    bool failed = false;
    int regularized_lags = 0;
    int failed_lags = 0;
    double wall_ms = 0.0;
};

/// Test hook: when set, replaces the estimated matrix for every cell (the
/// standard pipeline still runs the simulation). Returning nullopt marks the
/// cell failed.
using EstimateOverride = std::function<std::optional<StochasticMatrix>(
    const ExperimentSpec& spec, int replication, std::int64_t n, std::size_t grid_index)>;

/// Runs all replications x sample sizes. Records come back ordered by
/// (replication, n index, grid index) regardless of the thread count.
std::vector<ErrorRecord> run_experiment(const ExperimentSpec& spec,
                                        const EstimateOverride& override_estimate = nullptr);

struct SummaryCell {
    std::int64_t n = 0;
    std::size_t grid_index = 0;
    CovariatePoint point;
    std::size_t successes = 0;
    std::size_t failures = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double log10_median = 0.0;
    double failure_rate = 0.0;
};

/// Per (n, grid point) medians and quartiles of the spectral error.
/// Quartiles use the hinge convention: {1,2,3} gives (1.5, 2.5).
std::vector<SummaryCell> summarize(const std::vector<ErrorRecord>& records);

/// Ground truth at one evaluation point under this experiment design.
StochasticMatrix experiment_truth(const ExperimentSpec& spec, const CovariatePoint& z);

double median_of(std::vector<double> values);

}  // namespace rtme
