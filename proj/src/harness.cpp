#include "rtme/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "rtme/error.hpp"
#include "rtme/matfun.hpp"
#include "rtme/rng.hpp"

namespace rtme {

void ExperimentSpec::validate() const {
    SimConfig probe = sim;
    probe.paths = n_values.empty() ? 1 : n_values.front();
    probe.validate();
    if (estimator.grid.empty())
        throw config_error("InvalidConfig", "estimator.grid must be nonempty");
    if (estimator.states != sim.states)
        throw config_error("InvalidConfig", "estimator.states must match sim.states");
    if (n_values.empty()) throw config_error("InvalidConfig", "n_values must be nonempty");
    for (auto n : n_values)
        if (n < 1) throw config_error("InvalidConfig", "n_values entries must be >= 1");
    if (replications < 1) throw config_error("InvalidConfig", "replications must be >= 1");
    if (threads < 1) throw config_error("InvalidConfig", "threads must be >= 1");
}

StochasticMatrix experiment_truth(const ExperimentSpec& spec, const CovariatePoint& z) {
    if (spec.sim.with_covariates && !z.unconditional())
        return LinkModel(*spec.sim.base, spec.sim.psi).evaluate(z);
    return *spec.sim.base;
}

double median_of(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

// Cells are (replication, n index); each owns its simulation and bank.
struct Cell {
    int replication;
    std::size_t n_index;
};

void run_cell(const ExperimentSpec& spec, const EstimateOverride& override_estimate,
              const Cell& cell, std::vector<ErrorRecord>& out, std::size_t out_offset) {
    const std::int64_t n = spec.n_values[cell.n_index];

    SimConfig sim = spec.sim;
    sim.paths = n;
    // Distinct substream per (replication, n) cell.
    const std::uint64_t rep_key =
        Rng::mix(spec.seed ^ (0x51ED2701u + static_cast<std::uint64_t>(cell.n_index) * 0x9E3779B9u)) +
        static_cast<std::uint64_t>(cell.replication);

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SamplePath> paths = simulate_paths(sim, rep_key);

    EstimatorConfig cfg = resolve_sigma(spec.estimator, paths);
    AccumulatorBank bank = make_bank(cfg);
    for (const SamplePath& p : paths) bank.absorb(p);

    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
        ErrorRecord rec;
        rec.replication = cell.replication;
        rec.n = n;
        rec.grid_index = g;
        rec.point = cfg.grid[g];

        std::optional<StochasticMatrix> estimate;
        if (override_estimate) {
            estimate = override_estimate(spec, cell.replication, n, g);
        } else {
            EstimateResult res = estimate_point(bank, g, cfg.lag_lo, cfg.lag_hi, cfg.reg);
            for (const LagReport& lag : res.lags) {
                rec.regularized_lags += lag.regularized ? 1 : 0;
                rec.failed_lags += lag.log_failed ? 1 : 0;
            }
            estimate = res.aggregated;
        }

        if (estimate.has_value()) {
            const StochasticMatrix truth = experiment_truth(spec, cfg.grid[g]);
            rec.spectral_error = spectral_norm(estimate->matrix() - truth.matrix());
            rec.failed = false;
        } else {
            rec.spectral_error = std::numeric_limits<double>::quiet_NaN();
            rec.failed = true;
        }
        const auto t1 = std::chrono::steady_clock::now();
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        out[out_offset + g] = std::move(rec);
    }
}

}  // namespace

std::vector<ErrorRecord> run_experiment(const ExperimentSpec& spec,
                                        const EstimateOverride& override_estimate) {
    spec.validate();

    std::vector<Cell> cells;
    for (int rep = 0; rep < spec.replications; ++rep)
        for (std::size_t ni = 0; ni < spec.n_values.size(); ++ni) cells.push_back({rep, ni});

    const std::size_t grid_size = spec.estimator.grid.size();
    std::vector<ErrorRecord> records(cells.size() * grid_size);

    const int workers = std::min<int>(spec.threads, static_cast<int>(cells.size()));
    if (workers <= 1) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            run_cell(spec, override_estimate, cells[c], records, c * grid_size);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t c = next.fetch_add(1);
                    if (c >= cells.size()) return;
                    try {
                        run_cell(spec, override_estimate, cells[c], records, c * grid_size);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    return records;
}

std::vector<SummaryCell> summarize(const std::vector<ErrorRecord>& records) {
    if (records.empty()) throw argument_error("BadArgument", "no records to summarize");

    // Group by (n, grid index), keeping first-seen order.
    std::vector<SummaryCell> cells;
    std::vector<std::vector<double>> errors;
    auto find_cell = [&](std::int64_t n, std::size_t g) -> std::size_t {
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (cells[i].n == n && cells[i].grid_index == g) return i;
        cells.push_back({});
        cells.back().n = n;
        cells.back().grid_index = g;
        errors.emplace_back();
        return cells.size() - 1;
    };

    for (const ErrorRecord& rec : records) {
        const std::size_t i = find_cell(rec.n, rec.grid_index);
        cells[i].point = rec.point;
        if (rec.failed) {
            ++cells[i].failures;
        } else {
            ++cells[i].successes;
            errors[i].push_back(rec.spectral_error);
        }
    }

    for (std::size_t i = 0; i < cells.size(); ++i) {
        SummaryCell& cell = cells[i];
        std::vector<double>& vals = errors[i];
        std::sort(vals.begin(), vals.end());
        const std::size_t n = vals.size();
        cell.failure_rate = static_cast<double>(cell.failures) /
                            static_cast<double>(cell.failures + cell.successes);
        if (n == 0) {
            cell.median = cell.q1 = cell.q3 = cell.log10_median =
                std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        cell.median = median_of(vals);
        // Hinges: halves include the middle element when n is odd.
        const std::size_t half = (n + 1) / 2;
        cell.q1 = median_of(
            std::vector<double>(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(half)));
        cell.q3 = median_of(
            std::vector<double>(vals.end() - static_cast<std::ptrdiff_t>(half), vals.end()));
        cell.log10_median = std::log10(cell.median);
    }
    return cells;
}

}  // namespace rtme
