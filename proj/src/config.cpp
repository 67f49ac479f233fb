#include "rtme/config.hpp"

#include <cmath>

#include "rtme/error.hpp"

namespace rtme {

double covariate_sigma(const std::vector<SamplePath>& paths) {
    if (paths.empty()) throw data_error("EmptyRange", "cannot estimate sigma from an empty dataset");
    const std::size_t p = paths.front().covariates.continuous.size();
    if (p == 0) return 1.0;
    if (paths.size() < 2)
        throw data_error("EmptyRange", "need at least two paths to estimate sigma");

    double sigma_sum = 0.0;
    for (std::size_t q = 0; q < p; ++q) {
        double mean = 0.0;
        for (const auto& path : paths) mean += path.covariates.continuous[q];
        mean /= static_cast<double>(paths.size());
        double ss = 0.0;
        for (const auto& path : paths) {
            const double d = path.covariates.continuous[q] - mean;
            ss += d * d;
        }
        sigma_sum += std::sqrt(ss / static_cast<double>(paths.size() - 1));
    }
    const double sigma = sigma_sum / static_cast<double>(p);
    if (!(sigma > 0.0))
        throw data_error("EmptyRange", "continuous covariates are constant, sigma is zero");
    return sigma;
}

EstimatorConfig resolve_sigma(EstimatorConfig cfg, const std::vector<SamplePath>& paths) {
    if (cfg.sigma_from_data) {
        cfg.schedule.sigma_scale = covariate_sigma(paths);
        cfg.sigma_from_data = false;
    }
    return cfg;
}

AccumulatorBank make_bank(const EstimatorConfig& cfg) {
    if (cfg.sigma_from_data)
        throw config_error("InvalidConfig", "bandwidth sigma is unresolved; ingest a dataset first");
    if (cfg.lag_lo < 1 || cfg.lag_hi < cfg.lag_lo || cfg.lag_hi > cfg.max_gap)
        throw config_error("InvalidConfig", "lags must satisfy 1 <= lo <= hi <= max_gap");
    return AccumulatorBank(cfg.grid, cfg.states, cfg.max_gap, cfg.kernel, cfg.schedule);
}

}  // namespace rtme
