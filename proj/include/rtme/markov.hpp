#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rtme/matrix.hpp"

namespace rtme {

/// Row-stochastic matrix (entries in [0,1], unit row sums). Construction goes
/// through validate_stochastic, which clamps float-level noise and rejects
/// everything else, so holders of this type can rely on the invariants.
class StochasticMatrix {
public:
    StochasticMatrix() = default;  // empty; filled by deserialization paths

    const SquareMatrix& matrix() const { return m_; }
    int dim() const { return m_.dim(); }
    double at(int i, int j) const { return m_.at(i, j); }
    bool empty() const { return m_.empty(); }

    bool operator==(const StochasticMatrix&) const = default;

private:
    friend StochasticMatrix validate_stochastic(const SquareMatrix& m, double tol);
    explicit StochasticMatrix(SquareMatrix m) : m_(std::move(m)) {}
    SquareMatrix m_;
};

/// Validates (and lightly repairs) a candidate stochastic matrix: entries in
/// [-tol, 0) are clamped to zero and rows whose sums deviate from 1 by at
/// most tol are renormalized. Anything worse throws Error("NotStochastic")
/// with per-row diagnostics in the message.
StochasticMatrix validate_stochastic(const SquareMatrix& m, double tol = 1e-10);

/// Generator (Q-matrix): nonnegative off-diagonal, nonpositive diagonal,
/// zero row sums. exp of a generator is stochastic.
class GeneratorMatrix {
public:
    GeneratorMatrix() = default;

    static GeneratorMatrix validated(const SquareMatrix& m, double row_tol = 1e-10,
                                     double offdiag_tol = 1e-12);

    const SquareMatrix& matrix() const { return m_; }
    int dim() const { return m_.dim(); }
    bool empty() const { return m_.empty(); }

    /// G * factor for factor > 0 keeps all generator invariants (e.g. G/ell).
    GeneratorMatrix scaled(double factor) const;

    bool operator==(const GeneratorMatrix&) const = default;

private:
    explicit GeneratorMatrix(SquareMatrix m) : m_(std::move(m)) {}
    SquareMatrix m_;
};

/// Covariate value z = (z_c, z_d): continuous vector plus a tuple of small
/// nonnegative integers. Both empty means the unconditional case.
struct CovariatePoint {
    std::vector<double> continuous;
    std::vector<int> discrete;

    bool unconditional() const { return continuous.empty() && discrete.empty(); }
    bool operator==(const CovariatePoint&) const = default;
};

/// Scalar covariate score psi(z) in a declared, serializable form:
/// (intercept + sum_q coeff_q * z_c[q]) * prod_r factors_r[z_d[r]].
/// Factor tables are optional per discrete component (missing table = 1).
struct PsiSpec {
    double intercept = 0.0;
    std::vector<double> continuous_coeffs;
    std::vector<std::vector<double>> discrete_factors;

    double operator()(const CovariatePoint& z) const;
    bool operator==(const PsiSpec&) const = default;
};

/// Covariate-dependent transition model: row-wise softmax of base entries
/// scaled by psi(z). Rows sum to one by construction for every z.
class LinkModel {
public:
    LinkModel(StochasticMatrix base, PsiSpec psi) : base_(std::move(base)), psi_(std::move(psi)) {}

    StochasticMatrix evaluate(const CovariatePoint& z) const;

    const StochasticMatrix& base() const { return base_; }
    const PsiSpec& psi() const { return psi_; }

private:
    StochasticMatrix base_;
    PsiSpec psi_;
};

/// P^ell by repeated multiplication (ell >= 1).
StochasticMatrix matrix_power(const StochasticMatrix& p, int ell);

/// Built-in ground-truth transition matrices used by the simulator defaults
/// (3- and 5-state). Both are diagonally dominant and embeddable.
StochasticMatrix default_transition_matrix(int states);

/// One transition observed after `gap` time units.
struct Transition {
    int gap = 0;
    int state = 0;
};

/// One statistical unit: fixed covariates, the state at time zero, and the
/// observed (gap, state) sequence.
struct SamplePath {
    std::int64_t path_id = 0;
    CovariatePoint covariates;
    int initial_state = 1;
    std::vector<Transition> events;
};

}  // namespace rtme
