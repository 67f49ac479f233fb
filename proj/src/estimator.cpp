#include "rtme/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtme/error.hpp"
#include "rtme/matfun.hpp"

namespace rtme {

namespace {

// A row is treated as already balanced when its sum is this small relative
// to its absolute mass; keeps the weighted repair exactly idempotent under
// floating-point residue.
constexpr double kBalancedRowTol = 1e-13;

// log(A_hat) counts as already-a-generator when row sums and the most
// negative off-diagonal entry are within this tolerance.
constexpr double kNearGeneratorTol = 1e-10;

// Denominator threshold of the 0/0 rule, relative to the total weight mass.
constexpr double kMissingRowRel = 1e-12;

}  // namespace

RegMode reg_mode_parse(const std::string& name) {
    if (name == "diagonal") return RegMode::diagonal;
    if (name == "weighted") return RegMode::weighted;
    throw config_error("InvalidConfig", "unknown regularization mode '" + name + "'");
}

std::string reg_mode_name(RegMode mode) {
    return mode == RegMode::diagonal ? "diagonal" : "weighted";
}

GeneratorMatrix regularize_generator(const SquareMatrix& b, RegMode mode) {
    const int n = b.dim();
    SquareMatrix out = b;

    // Step 1: clear negative off-diagonal entries.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && out.at(i, j) < 0.0) out.at(i, j) = 0.0;

    if (mode == RegMode::diagonal) {
        for (int i = 0; i < n; ++i) {
            double off = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) off += out.at(i, j);
            out.at(i, i) = -off;
        }
        return GeneratorMatrix::validated(out);
    }

    // Weighted adjustment: shrink each entry by |entry| * rowsum / rowabssum.
    for (int i = 0; i < n; ++i) {
        double sum = 0.0, abs_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            sum += out.at(i, j);
            abs_sum += std::fabs(out.at(i, j));
        }
        if (abs_sum == 0.0) continue;  // zero row, already a generator row
        const double ratio = sum / abs_sum;
        if (std::fabs(ratio) <= kBalancedRowTol) continue;
        for (int j = 0; j < n; ++j) out.at(i, j) -= std::fabs(out.at(i, j)) * ratio;
        if (out.at(i, i) > 1e-12)
            throw numeric_error("NotGenerator",
                                "weighted adjustment left a positive diagonal in row " +
                                    std::to_string(i + 1));
        // Pin the row sum to exactly zero; the shrunk diagonal already equals
        // this up to rounding.
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += out.at(i, j);
        out.at(i, i) = -off;
    }
    return GeneratorMatrix::validated(out);
}

AccumulatorBank::AccumulatorBank(std::vector<CovariatePoint> grid_in, int states_in, int max_gap_in,
                                 KernelSpec kernel_in, BandwidthSchedule schedule_in)
    : grid(std::move(grid_in)),
      states(states_in),
      max_gap(max_gap_in),
      kernel(kernel_in),
      schedule(schedule_in) {
    if (grid.empty()) throw config_error("InvalidConfig", "evaluation grid must be nonempty");
    if (states < 2) throw config_error("InvalidConfig", "state count must be at least 2");
    if (max_gap < 1) throw config_error("InvalidConfig", "max gap must be at least 1");
    const std::size_t p = grid.front().continuous.size();
    const std::size_t d = grid.front().discrete.size();
    for (const auto& z : grid) {
        if (z.continuous.size() != p || z.discrete.size() != d)
            throw config_error("InvalidConfig", "grid points must share covariate dimensions");
    }
    schedule.validate(p);
    u_t.assign(grid.size() * static_cast<std::size_t>(max_gap) * states * states, 0.0);
    u_b.assign(grid.size() * static_cast<std::size_t>(max_gap) * states, 0.0);
}

std::size_t AccumulatorBank::continuous_dim() const { return grid.front().continuous.size(); }

double& AccumulatorBank::ut(std::size_t g, int gap, int from, int to) {
    return u_t[((g * max_gap + (gap - 1)) * states + (from - 1)) * states + (to - 1)];
}
double AccumulatorBank::ut(std::size_t g, int gap, int from, int to) const {
    return u_t[((g * max_gap + (gap - 1)) * states + (from - 1)) * states + (to - 1)];
}
double& AccumulatorBank::ub(std::size_t g, int gap, int from) {
    return u_b[(g * max_gap + (gap - 1)) * states + (from - 1)];
}
double AccumulatorBank::ub(std::size_t g, int gap, int from) const {
    return u_b[(g * max_gap + (gap - 1)) * states + (from - 1)];
}

double AccumulatorBank::path_weight(const CovariatePoint& z, std::size_t g, std::uint64_t m) const {
    const CovariatePoint& target = grid[g];
    const double w = schedule.weight(m);
    if (target.unconditional()) return w;

    if (z.continuous.size() != target.continuous.size() ||
        z.discrete.size() != target.discrete.size())
        throw data_error("ShapeMismatch", "path covariates do not match the grid dimensions");

    if (z.discrete != target.discrete) return 0.0;

    double k = 1.0;
    const double h = schedule.bandwidth(m);
    for (std::size_t q = 0; q < target.continuous.size(); ++q)
        k *= kernel((z.continuous[q] - target.continuous[q]) / h);
    const double hp = std::pow(h, -static_cast<double>(target.continuous.size()));
    return w * hp * k;
}

void AccumulatorBank::absorb(const SamplePath& path) {
    const std::uint64_t m = first_path_index + n_paths;

    std::vector<double> factor(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) factor[g] = path_weight(path.covariates, g, m);

    int from = path.initial_state;
    for (const Transition& t : path.events) {
        if (from < 1 || from > states || t.state < 1 || t.state > states)
            throw data_error("StateOutOfRange",
                             "path " + std::to_string(path.path_id) + " has a state outside 1.." +
                                 std::to_string(states));
        if (t.gap < 1)
            throw data_error("StateOutOfRange",
                             "path " + std::to_string(path.path_id) + " has a gap below 1");
        if (t.gap > max_gap) {
            ++skipped_transitions;
        } else {
            for (std::size_t g = 0; g < grid.size(); ++g) {
                if (factor[g] == 0.0) continue;
                ut(g, t.gap, from, t.state) += factor[g];
                ub(g, t.gap, from) += factor[g];
            }
        }
        from = t.state;
    }

    ++n_paths;
    omega_sum += schedule.weight(m);
}

bool AccumulatorBank::compatible_with(const AccumulatorBank& other) const {
    return grid == other.grid && states == other.states && max_gap == other.max_gap &&
           kernel == other.kernel && schedule == other.schedule;
}

void AccumulatorBank::merge(const AccumulatorBank& other) {
    if (!compatible_with(other))
        throw data_error("ShapeMismatch", "banks differ in grid, dimensions, kernel or schedule");
    const bool overlap = n_paths > 0 && other.n_paths > 0 &&
                         first_path_index < other.first_path_index + other.n_paths &&
                         other.first_path_index < first_path_index + n_paths;
    if (overlap)
        throw data_error("ShapeMismatch", "banks cover overlapping path-index ranges");
    for (std::size_t k = 0; k < u_t.size(); ++k) u_t[k] += other.u_t[k];
    for (std::size_t k = 0; k < u_b.size(); ++k) u_b[k] += other.u_b[k];
    if (other.n_paths > 0)
        first_path_index = n_paths > 0 ? std::min(first_path_index, other.first_path_index)
                                       : other.first_path_index;
    n_paths += other.n_paths;
    omega_sum += other.omega_sum;
    skipped_transitions += other.skipped_transitions;
}

bool PowerEstimate::all_missing() const {
    for (auto f : row_missing)
        if (!f) return false;
    return true;
}

bool PowerEstimate::any_missing() const {
    for (auto f : row_missing)
        if (f) return true;
    return false;
}

PowerEstimate power_estimate(const AccumulatorBank& bank, std::size_t grid_index, int gap) {
    if (grid_index >= bank.grid.size())
        throw argument_error("BadArgument", "grid index out of range");
    if (gap < 1 || gap > bank.max_gap)
        throw argument_error("BadArgument", "gap outside the tracked window");

    const int n = bank.states;
    PowerEstimate est{SquareMatrix(n), std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
    const double threshold = kMissingRowRel * bank.omega_sum;

    for (int i = 1; i <= n; ++i) {
        const double denom = bank.ub(grid_index, gap, i);
        if (denom <= threshold) {
            est.row_missing[static_cast<std::size_t>(i - 1)] = 1;  // 0/0 = 0: row stays zero
            continue;
        }
        for (int j = 1; j <= n; ++j)
            est.matrix.at(i - 1, j - 1) = bank.ut(grid_index, gap, i, j) / denom;
    }
    return est;
}

std::vector<double> gap_weights(const AccumulatorBank& bank, std::size_t grid_index, int lag_lo,
                                int lag_hi) {
    if (lag_lo < 1 || lag_hi < lag_lo || lag_hi > bank.max_gap)
        throw argument_error("BadArgument", "gap range must satisfy 1 <= lo <= hi <= max_gap");

    std::vector<double> w(static_cast<std::size_t>(lag_hi - lag_lo + 1), 0.0);
    double total = 0.0;
    for (int gap = lag_lo; gap <= lag_hi; ++gap) {
        double s = 0.0;
        for (int i = 1; i <= bank.states; ++i) s += bank.ub(grid_index, gap, i);
        w[static_cast<std::size_t>(gap - lag_lo)] = s;
        total += s;
    }
    if (total <= 0.0)
        throw data_error("EmptyRange", "no mass observed in the requested gap range");
    for (double& x : w) x /= total;
    return w;
}

LagEstimate transition_from_power(const StochasticMatrix& a, int ell, RegMode mode) {
    if (ell < 1) throw argument_error("BadArgument", "lag must be at least 1");

    const SquareMatrix raw_log = mat_log_principal(a.matrix());

    // Deviation of the raw log from a generator.
    double worst_row = 0.0, worst_offdiag = 0.0;
    for (int i = 0; i < raw_log.dim(); ++i) {
        double sum = 0.0;
        for (int j = 0; j < raw_log.dim(); ++j) {
            sum += raw_log.at(i, j);
            if (i != j && raw_log.at(i, j) < 0.0)
                worst_offdiag = std::max(worst_offdiag, -raw_log.at(i, j));
        }
        worst_row = std::max(worst_row, std::fabs(sum));
    }
    const bool near_generator = worst_row <= kNearGeneratorTol && worst_offdiag <= kNearGeneratorTol;

    GeneratorMatrix gen;
    if (mode == RegMode::weighted) {
        try {
            gen = regularize_generator(raw_log, RegMode::weighted);
        } catch (const Error& e) {
            if (e.code() != "NotGenerator") throw;
            gen = regularize_generator(raw_log, RegMode::diagonal);
        }
    } else {
        gen = regularize_generator(raw_log, RegMode::diagonal);
    }

    LagEstimate out;
    out.regularized = !near_generator;
    out.generator = gen;
    out.one_step = validate_stochastic(mat_exp(gen.scaled(1.0 / ell).matrix()), 1e-10);
    return out;
}

StochasticMatrix aggregate_transitions(
    const std::vector<std::pair<double, StochasticMatrix>>& weighted) {
    double total = 0.0;
    int dim = 0;
    for (const auto& [w, p] : weighted) {
        if (w < 0.0) throw argument_error("BadArgument", "aggregation weights must be nonnegative");
        total += w;
        dim = p.dim();
    }
    if (weighted.empty() || total <= 0.0)
        throw numeric_error("NoUsableLag", "no usable per-gap estimate to aggregate");

    SquareMatrix acc(dim);
    for (const auto& [w, p] : weighted) {
        if (w == 0.0) continue;
        acc += p.matrix() * (w / total);
    }
    return validate_stochastic(acc, 1e-10);
}

EstimateResult estimate_point(const AccumulatorBank& bank, std::size_t grid_index, int lag_lo,
                              int lag_hi, RegMode mode) {
    if (grid_index >= bank.grid.size())
        throw argument_error("BadArgument", "grid index out of range");

    EstimateResult result;
    result.point = bank.grid[grid_index];
    result.lag_lo = lag_lo;
    result.lag_hi = lag_hi;

    if (lag_lo < 1 || lag_hi < lag_lo || lag_hi > bank.max_gap)
        throw argument_error("BadArgument", "gap range must satisfy 1 <= lo <= hi <= max_gap");

    std::vector<double> raw(static_cast<std::size_t>(lag_hi - lag_lo + 1), 0.0);
    for (int gap = lag_lo; gap <= lag_hi; ++gap) {
        double s = 0.0;
        for (int i = 1; i <= bank.states; ++i) s += bank.ub(grid_index, gap, i);
        raw[static_cast<std::size_t>(gap - lag_lo)] = s;
    }

    double usable_total = 0.0;
    for (int gap = lag_lo; gap <= lag_hi; ++gap) {
        LagReport report;
        report.gap = gap;
        report.weight_raw = raw[static_cast<std::size_t>(gap - lag_lo)];

        if (report.weight_raw <= 0.0) {
            report.no_data = true;
            result.lags.push_back(std::move(report));
            continue;
        }

        PowerEstimate pe = power_estimate(bank, grid_index, gap);
        report.rows_missing = pe.row_missing;
        if (pe.all_missing()) {
            report.no_data = true;
            result.lags.push_back(std::move(report));
            continue;
        }

        // Missing rows are completed with the identity row so the matrix
        // stays stochastic; they remain flagged for the caller.
        SquareMatrix completed = pe.matrix;
        for (int i = 0; i < bank.states; ++i)
            if (pe.row_missing[static_cast<std::size_t>(i)]) completed.at(i, i) = 1.0;

        StochasticMatrix a;
        try {
            a = validate_stochastic(completed, 1e-9);
        } catch (const Error&) {
            report.no_data = true;
            result.lags.push_back(std::move(report));
            continue;
        }
        report.power = a;

        try {
            LagEstimate le = transition_from_power(a, gap, mode);
            report.generator = le.generator;
            report.one_step = le.one_step;
            report.regularized = le.regularized;
            usable_total += report.weight_raw;
        } catch (const Error& e) {
            if (e.error_class() != ErrClass::numeric) throw;
            report.log_failed = true;
        }
        result.lags.push_back(std::move(report));
    }

    std::vector<std::pair<double, StochasticMatrix>> usable;
    for (auto& report : result.lags) {
        if (report.one_step.has_value() && report.weight_raw > 0.0) {
            report.weight = report.weight_raw / usable_total;
            usable.emplace_back(report.weight, *report.one_step);
        } else if (report.log_failed) {
            result.warnings.push_back("gap " + std::to_string(report.gap) +
                                      ": no principal real log, excluded from aggregation");
        }
    }

    if (usable.empty()) {
        result.warnings.push_back("no usable gap in [" + std::to_string(lag_lo) + ", " +
                                  std::to_string(lag_hi) + "]");
        return result;
    }
    result.aggregated = aggregate_transitions(usable);
    return result;
}

double optimal_bandwidth_constant(double beta, double alpha, int p, const BandwidthPlugin& plugin) {
    if (p < 1) throw argument_error("BadArgument", "p must be at least 1");
    const double pd = static_cast<double>(p);
    if (std::fabs(alpha - 1.0 / (pd + 4.0)) > 1e-12)
        throw config_error("InvalidConfig", "the closed form requires alpha = 1/(p+4)");
    if (plugin.trace_hessian == 0.0)
        throw numeric_error("DegenerateHessian", "zero Hessian trace admits no finite optimum");
    if (!(plugin.density_value > 0.0) || !(plugin.kernel_l2 > 0.0) || !(plugin.kernel_mu2 > 0.0) ||
        !(plugin.max_window > 0.0))
        throw argument_error("BadArgument", "plug-in quantities must be positive");

    const double bias_term = plugin.kernel_mu2 * plugin.trace_hessian;
    const double numerator = pd * (1.0 + beta - 2.0 * alpha) * (1.0 + beta - 2.0 * alpha) *
                             plugin.max_window * std::pow(plugin.kernel_l2, pd) *
                             plugin.density_value;
    const double denominator = (1.0 + alpha * pd + 2.0 * beta) * bias_term * bias_term;
    return std::pow(numerator / denominator, alpha);
}

double recursive_shrink_factor(double beta, int p) {
    if (p < 1) throw argument_error("BadArgument", "p must be at least 1");
    const double pd = static_cast<double>(p);
    const double value = std::pow((beta * pd + pd + 2.0) / (2.0 * (pd + 4.0)), 1.0 / (pd + 4.0));
    if (!(value < 1.0))
        throw numeric_error("ShrinkFactorRange", "shrink factor unexpectedly reached 1");
    return value;
}

}  // namespace rtme
