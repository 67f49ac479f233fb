#pragma once

#include <vector>

#include "rtme/estimator.hpp"
#include "rtme/kernel.hpp"
#include "rtme/markov.hpp"

namespace rtme {

/// Everything needed to build an AccumulatorBank and run the estimation
/// pipeline on it. `sigma_from_data` marks a schedule whose sigma_scale is
/// still to be resolved from the first dataset seen; checkpoints always
/// carry the resolved value.
struct EstimatorConfig {
    int states = 3;
    KernelSpec kernel;
    BandwidthSchedule schedule;
    bool sigma_from_data = false;
    int lag_lo = 6;
    int lag_hi = 20;
    int max_gap = 40;
    RegMode reg = RegMode::weighted;
    std::vector<CovariatePoint> grid;
};

/// Pooled sample standard deviation of the continuous covariates (mean over
/// components for p > 1). Used when the bandwidth scale is data-driven.
double covariate_sigma(const std::vector<SamplePath>& paths);

/// Resolves sigma_from_data against a dataset (no-op otherwise) and returns
/// a ready-to-use bank configuration.
EstimatorConfig resolve_sigma(EstimatorConfig cfg, const std::vector<SamplePath>& paths);

AccumulatorBank make_bank(const EstimatorConfig& cfg);

}  // namespace rtme
