#include "rtme/simulator.hpp"

#include <cmath>

#include "rtme/error.hpp"
#include "rtme/rng.hpp"

namespace rtme {

void SimConfig::validate() const {
    if (states < 2) throw config_error("InvalidConfig", "sim.states must be at least 2");
    if (paths < 1) throw config_error("InvalidConfig", "sim.paths must be at least 1");
    if (window < 2) throw config_error("InvalidConfig", "sim.window must be at least 2");
    if (!base.has_value()) throw config_error("InvalidConfig", "sim.base_matrix is required");
    if (base->dim() != states)
        throw config_error("InvalidConfig", "sim.base_matrix dimension must equal sim.states");
    if (gap_means.size() != static_cast<std::size_t>(states))
        throw config_error("InvalidConfig", "sim.gap_means must list one Poisson mean per state");
    for (std::size_t i = 0; i < gap_means.size(); ++i) {
        if (!(gap_means[i] > 0.0))
            throw config_error("InvalidConfig", "sim.gap_means[" + std::to_string(i) +
                                                    "] must be positive");
    }
    if (covariate_law.beta_a < 1 || covariate_law.beta_b < 1)
        throw config_error("InvalidConfig", "sim.covariates Beta parameters must be >= 1");
    if (covariate_law.bernoulli_q < 0.0 || covariate_law.bernoulli_q > 1.0)
        throw config_error("InvalidConfig", "sim.covariates Bernoulli parameter must be in [0,1]");
}

std::vector<double> default_gap_means(int states) {
    std::vector<double> means(static_cast<std::size_t>(states), 15.0);
    for (int i = 0; i < std::min(states, 2); ++i) means[static_cast<std::size_t>(i)] = 10.0;
    return means;
}

namespace {

int draw_from_row(const StochasticMatrix& p, int from, double u) {
    double cum = 0.0;
    for (int j = 1; j <= p.dim(); ++j) {
        cum += p.at(from - 1, j - 1);
        if (u < cum) return j;
    }
    return p.dim();  // guard against cumulative rounding just below 1
}

}  // namespace

SamplePath simulate_one(const SimConfig& cfg, std::uint64_t replication, std::int64_t path_index) {
    Rng rng = Rng::keyed(cfg.seed, replication, static_cast<std::uint64_t>(path_index));

    SamplePath path;
    path.path_id = path_index;

    // Draw order is part of the determinism contract: covariates first,
    // then the initial state, then alternating gap / state draws.
    if (cfg.with_covariates) {
        path.covariates.continuous.push_back(cfg.covariate_law.shift +
                                             rng.beta(cfg.covariate_law.beta_a,
                                                      cfg.covariate_law.beta_b));
        path.covariates.discrete.push_back(rng.bernoulli(cfg.covariate_law.bernoulli_q) ? 1 : 0);
    }

    const StochasticMatrix transition =
        cfg.with_covariates ? LinkModel(*cfg.base, cfg.psi).evaluate(path.covariates) : *cfg.base;

    path.initial_state = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.states))) + 1;

    int state = path.initial_state;
    std::int64_t elapsed = 0;
    while (elapsed < cfg.window) {
        const double mean = cfg.gap_means[static_cast<std::size_t>(state - 1)];
        const int gap = static_cast<int>(rng.poisson(mean)) + 1;
        const StochasticMatrix step = matrix_power(transition, gap);
        state = draw_from_row(step, state, rng.next_unit());
        path.events.push_back({gap, state});
        elapsed += gap;
    }
    return path;
}

std::vector<SamplePath> simulate_paths(const SimConfig& cfg, std::uint64_t replication) {
    cfg.validate();
    std::vector<SamplePath> paths;
    paths.reserve(static_cast<std::size_t>(cfg.paths));
    for (std::int64_t m = 1; m <= cfg.paths; ++m)
        paths.push_back(simulate_one(cfg, replication, m));
    return paths;
}

std::map<int, std::int64_t> gap_histogram(const std::vector<SamplePath>& paths) {
    std::map<int, std::int64_t> hist;
    for (const SamplePath& p : paths)
        for (const Transition& t : p.events) ++hist[t.gap];
    return hist;
}

}  // namespace rtme
