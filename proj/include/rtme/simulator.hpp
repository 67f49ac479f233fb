#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rtme/markov.hpp"

namespace rtme {

/// Distribution of the covariate draw per path: Z_c[q] = shift + Beta(a, b),
/// Z_d[r] ~ Bernoulli(q).
struct CovariateLaw {
    double shift = 1.0;
    int beta_a = 2;
    int beta_b = 2;
    double bernoulli_q = 0.7;

    bool operator==(const CovariateLaw&) const = default;
};

struct SimConfig {
    int states = 3;
    bool with_covariates = false;
    std::int64_t paths = 0;  // N
    int window = 20;         // L: stop once cumulative gaps reach this
    std::vector<double> gap_means;  // Poisson mean per current state; gap = 1 + Poisson
    CovariateLaw covariate_law;
    std::optional<StochasticMatrix> base;  // one-step ground truth
    PsiSpec psi;                           // used when with_covariates
    std::uint64_t seed = 0;

    void validate() const;
};

/// Poisson means used by the built-in designs: 10 for states 1..2, 15 above.
std::vector<double> default_gap_means(int states);

/// One path with substream keyed by (seed, replication, path_index).
/// path_index is 1-based and becomes the path_id.
SamplePath simulate_one(const SimConfig& cfg, std::uint64_t replication, std::int64_t path_index);

/// All N paths of one replication, in path_id order. Deterministic given
/// (cfg.seed, replication) regardless of how work would be scheduled.
std::vector<SamplePath> simulate_paths(const SimConfig& cfg, std::uint64_t replication = 0);

/// Exact gap frequency counts over all transitions.
std::map<int, std::int64_t> gap_histogram(const std::vector<SamplePath>& paths);

}  // namespace rtme
