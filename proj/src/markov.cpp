#include "rtme/markov.hpp"

#include <cmath>
#include <sstream>

#include "rtme/error.hpp"

namespace rtme {

StochasticMatrix validate_stochastic(const SquareMatrix& m, double tol) {
    if (tol < 0.0) throw argument_error("BadArgument", "tolerance must be nonnegative");
    const int n = m.dim();
    SquareMatrix fixed = m;
    std::ostringstream issues;
    bool bad = false;

    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double v = fixed.at(i, j);
            if (v < 0.0) {
                if (v < -tol) {
                    issues << " row " << i + 1 << ": entry " << v << " below zero;";
                    bad = true;
                } else {
                    v = 0.0;
                    fixed.at(i, j) = 0.0;
                }
            }
            sum += v;
        }
        if (std::fabs(sum - 1.0) > tol) {
            issues << " row " << i + 1 << ": sum deviates by " << sum - 1.0 << ";";
            bad = true;
        } else if (sum != 1.0 && sum > 0.0) {
            for (int j = 0; j < n; ++j) fixed.at(i, j) /= sum;
        }
    }
    if (bad) throw numeric_error("NotStochastic", "matrix is not row-stochastic:" + issues.str());
    return StochasticMatrix(std::move(fixed));
}

GeneratorMatrix GeneratorMatrix::validated(const SquareMatrix& m, double row_tol,
                                           double offdiag_tol) {
    const int n = m.dim();
    std::ostringstream issues;
    bool bad = false;
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double v = m.at(i, j);
            sum += v;
            if (i == j && v > offdiag_tol) {
                issues << " row " << i + 1 << ": positive diagonal " << v << ";";
                bad = true;
            }
            if (i != j && v < -offdiag_tol) {
                issues << " row " << i + 1 << ": negative off-diagonal " << v << ";";
                bad = true;
            }
        }
        if (std::fabs(sum) > row_tol) {
            issues << " row " << i + 1 << ": sum " << sum << ";";
            bad = true;
        }
    }
    if (bad) throw numeric_error("NotGenerator", "matrix is not a generator:" + issues.str());
    return GeneratorMatrix(m);
}

GeneratorMatrix GeneratorMatrix::scaled(double factor) const {
    if (!(factor > 0.0)) throw argument_error("BadArgument", "scale factor must be positive");
    return GeneratorMatrix(m_ * factor);
}

double PsiSpec::operator()(const CovariatePoint& z) const {
    if (continuous_coeffs.size() > z.continuous.size())
        throw data_error("ShapeMismatch", "psi has more continuous coefficients than covariates");
    double v = intercept;
    for (std::size_t q = 0; q < continuous_coeffs.size(); ++q)
        v += continuous_coeffs[q] * z.continuous[q];
    for (std::size_t r = 0; r < discrete_factors.size(); ++r) {
        if (discrete_factors[r].empty()) continue;
        if (r >= z.discrete.size())
            throw data_error("ShapeMismatch", "psi has more discrete factor tables than covariates");
        const int val = z.discrete[r];
        if (val < 0 || static_cast<std::size_t>(val) >= discrete_factors[r].size())
            throw data_error("ShapeMismatch", "discrete covariate outside declared psi support");
        v *= discrete_factors[r][static_cast<std::size_t>(val)];
    }
    return v;
}

StochasticMatrix LinkModel::evaluate(const CovariatePoint& z) const {
    const double score = psi_(z);
    if (!std::isfinite(score))
        throw numeric_error("NonFinite", "psi evaluated to a non-finite value");
    const int n = base_.dim();
    SquareMatrix out(n);
    for (int i = 0; i < n; ++i) {
        double row_max = base_.at(i, 0) * score;
        for (int j = 1; j < n; ++j) row_max = std::max(row_max, base_.at(i, j) * score);
        double denom = 0.0;
        for (int j = 0; j < n; ++j) {
            const double e = std::exp(base_.at(i, j) * score - row_max);
            out.at(i, j) = e;
            denom += e;
        }
        for (int j = 0; j < n; ++j) out.at(i, j) /= denom;
    }
    return validate_stochastic(out, 1e-10);
}

StochasticMatrix matrix_power(const StochasticMatrix& p, int ell) {
    if (ell < 1) throw argument_error("BadArgument", "power must be at least 1");
    SquareMatrix acc = p.matrix();
    for (int k = 1; k < ell; ++k) acc = acc * p.matrix();
    return validate_stochastic(acc, 1e-10);
}

StochasticMatrix default_transition_matrix(int states) {
    if (states == 3) {
        return validate_stochastic(
            SquareMatrix::from_rows({{0.940007, 0.034412, 0.025581},
                                     {0.038810, 0.925639, 0.035551},
                                     {0.003831, 0.025038, 0.971131}}),
            1e-6);
    }
    if (states == 5) {
        return validate_stochastic(
            SquareMatrix::from_rows({{0.914828, 0.017832, 0.015797, 0.039951, 0.011592},
                                     {0.004332, 0.940624, 0.035217, 0.001473, 0.018354},
                                     {0.008712, 0.017389, 0.931986, 0.011289, 0.030624},
                                     {0.003389, 0.030794, 0.027967, 0.903348, 0.034502},
                                     {0.003325, 0.037597, 0.043798, 0.028478, 0.886802}}),
            1e-6);
    }
    throw config_error("InvalidConfig", "built-in transition matrices exist for 3 or 5 states");
}

}  // namespace rtme
