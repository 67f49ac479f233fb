#pragma once

#include <complex>
#include <vector>

#include "rtme/matrix.hpp"

namespace rtme {

/// Eigenvalue summary of a real square matrix.
struct Spectrum {
    std::vector<std::complex<double>> eigenvalues;  // sorted by (re, im)
    double min_modulus = 0.0;
    // Smallest point-to-set distance from any eigenvalue to the closed
    // negative real half-line (-inf, 0]. Zero means a principal real
    // logarithm does not exist.
    double dist_to_neg_axis = 0.0;
};

Spectrum spectrum(const SquareMatrix& a);

/// Spectral radius max |lambda|, read off a Spectrum.
double spectral_radius(const Spectrum& s);

/// Matrix exponential via Pade approximation with scaling and squaring.
/// exp(0) = I exactly; relative accuracy near machine precision for
/// moderate norms. Throws Error("Overflow") when the result cannot be
/// represented in double precision.
SquareMatrix mat_exp(const SquareMatrix& q);

/// Principal real matrix logarithm via inverse scaling and squaring:
/// repeated Denman-Beavers square roots until the spectrum clusters near 1,
/// then a truncated Mercator series, then scaling back by 2^k.
/// Throws Error("NegativeEigenvalue") when an eigenvalue sits on the closed
/// negative half-line, Error("Singular") when one is (numerically) zero.
SquareMatrix mat_log_principal(const SquareMatrix& a);

/// Partial sum of log(I + B) = B - B^2/2 + B^3/3 - ... with B = A - I,
/// truncated after `terms` terms. Requires spectral radius of B below 1;
/// throws Error("DivergenceRisk") otherwise.
SquareMatrix mercator_log(const SquareMatrix& a, int terms);

/// True iff P^{-1} = s I - B with B >= 0 entrywise and s > rho(B), i.e. the
/// inverse of P is a nonsingular M-matrix. Such stochastic P have stochastic
/// roots of every order. Returns false (no error) on singular P.
bool is_m_matrix_inverse(const SquareMatrix& p);

enum class GeneratorUniqueness { unique, inconclusive };

/// Sufficient conditions for a stochastic matrix to admit at most one
/// generator: min_i P_ii > 1/2, or [min_i P_ii] det(P) > exp(-pi) prod_i P_ii.
GeneratorUniqueness generator_uniqueness_check(const SquareMatrix& p);

/// Largest singular value, via power iteration on M^T M (tolerance 1e-10).
double spectral_norm(const SquareMatrix& m);

}  // namespace rtme
