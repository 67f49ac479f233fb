#include "rtme/matfun.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "rtme/error.hpp"

namespace rtme {

namespace {

constexpr double kSingularTol = 1e-12;
constexpr double kNegAxisImagTol = 1e-10;
constexpr double kNegAxisRealTol = 1e-12;

// Inverse scaling and squaring parameters.
constexpr double kSeriesRadius = 0.25;  // target rho(X - I) before the series
constexpr int kMaxSquareRoots = 60;
constexpr double kSqrtTol = 1e-14;
constexpr int kMaxSqrtIters = 100;

double dist_to_negative_halfline(std::complex<double> z) {
    return z.real() <= 0.0 ? std::fabs(z.imag()) : std::abs(z);
}

// rho(X - I) from the spectrum of X.
double radius_around_one(const SquareMatrix& x) {
    double r = 0.0;
    for (const auto& ev : spectrum(x).eigenvalues) r = std::max(r, std::abs(ev - 1.0));
    return r;
}

// Denman-Beavers iteration for the principal square root. The caller
// guarantees that no eigenvalue lies on (-inf, 0].
SquareMatrix principal_sqrt(const SquareMatrix& a) {
    SquareMatrix y = a;
    SquareMatrix z = SquareMatrix::identity(a.dim());
    for (int it = 0; it < kMaxSqrtIters; ++it) {
        SquareMatrix yn = 0.5 * (y + z.inverse());
        SquareMatrix zn = 0.5 * (z + y.inverse());
        const double change = max_abs_diff(yn, y);
        y = std::move(yn);
        z = std::move(zn);
        if (change <= kSqrtTol * std::max(1.0, y.max_abs())) return y;
    }
    throw numeric_error("SqrtNoConvergence", "matrix square root iteration did not converge");
}

}  // namespace

Spectrum spectrum(const SquareMatrix& a) {
    if (!a.all_finite()) throw argument_error("NonFinite", "matrix entries must be finite");
    const int n = a.dim();
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = a.at(i, j);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw numeric_error("EigenFailure", "eigenvalue computation did not converge");

    Spectrum s;
    s.eigenvalues.reserve(n);
    for (int i = 0; i < n; ++i) s.eigenvalues.push_back(solver.eigenvalues()[i]);
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](const auto& x, const auto& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });

    s.min_modulus = std::abs(s.eigenvalues.front());
    s.dist_to_neg_axis = dist_to_negative_halfline(s.eigenvalues.front());
    for (const auto& ev : s.eigenvalues) {
        s.min_modulus = std::min(s.min_modulus, std::abs(ev));
        s.dist_to_neg_axis = std::min(s.dist_to_neg_axis, dist_to_negative_halfline(ev));
    }
    return s;
}

double spectral_radius(const Spectrum& s) {
    double r = 0.0;
    for (const auto& ev : s.eigenvalues) r = std::max(r, std::abs(ev));
    return r;
}

SquareMatrix mat_exp(const SquareMatrix& q) {
    if (!q.all_finite()) throw argument_error("NonFinite", "matrix entries must be finite");

    // Degree-13 Pade coefficients (Higham's expm).
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double nrm = q.norm_one();
    int s = 0;
    if (nrm > theta13) {
        s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        if (s > 60) throw numeric_error("Overflow", "matrix norm too large for exponential");
    }
    SquareMatrix a = q * std::ldexp(1.0, -s);

    const int n = q.dim();
    const SquareMatrix ident = SquareMatrix::identity(n);
    const SquareMatrix a2 = a * a;
    const SquareMatrix a4 = a2 * a2;
    const SquareMatrix a6 = a4 * a2;

    SquareMatrix u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                          b[3] * a2 + b[1] * ident);
    SquareMatrix v =
        a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;

    SquareMatrix x = (v - u).solve(v + u);
    for (int i = 0; i < s; ++i) x = x * x;

    if (!x.all_finite()) throw numeric_error("Overflow", "matrix exponential overflowed");
    return x;
}

SquareMatrix mat_log_principal(const SquareMatrix& a) {
    const Spectrum spec = spectrum(a);
    for (const auto& ev : spec.eigenvalues) {
        if (std::abs(ev) < kSingularTol)
            throw numeric_error("Singular", "eigenvalue modulus below tolerance, no logarithm");
        if (std::fabs(ev.imag()) < kNegAxisImagTol && ev.real() <= kNegAxisRealTol)
            throw numeric_error("NegativeEigenvalue",
                                "eigenvalue on the closed negative half-line, no principal real log");
    }

    SquareMatrix x = a;
    int roots = 0;
    while (radius_around_one(x) > kSeriesRadius) {
        if (roots >= kMaxSquareRoots)
            throw numeric_error("LogNoConvergence", "inverse scaling did not contract the spectrum");
        x = principal_sqrt(x);
        ++roots;
    }

    // Mercator series on B = X - I; rho(B) <= 0.25 so it converges fast.
    SquareMatrix b = x - SquareMatrix::identity(x.dim());
    SquareMatrix term = b;
    SquareMatrix sum = b;
    for (int k = 2; k <= 200; ++k) {
        term = term * b;
        const double sgn = (k % 2 == 0) ? -1.0 : 1.0;
        sum += term * (sgn / k);
        if (term.max_abs() / k < 1e-18) break;
    }
    return sum * std::ldexp(1.0, roots);
}

SquareMatrix mercator_log(const SquareMatrix& a, int terms) {
    if (terms < 1) throw argument_error("BadArgument", "terms must be positive");
    SquareMatrix b = a - SquareMatrix::identity(a.dim());
    if (spectral_radius(spectrum(b)) >= 1.0)
        throw numeric_error("DivergenceRisk", "spectral radius of A - I is not below 1");

    SquareMatrix term = b;
    SquareMatrix sum = b;
    for (int k = 2; k <= terms; ++k) {
        term = term * b;
        const double sgn = (k % 2 == 0) ? -1.0 : 1.0;
        sum += term * (sgn / k);
    }
    return sum;
}

bool is_m_matrix_inverse(const SquareMatrix& p) {
    SquareMatrix inv(p.dim());
    try {
        inv = p.inverse();
    } catch (const Error&) {
        return false;
    }

    const int n = inv.dim();
    double s = inv.at(0, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                s = std::max(s, inv.at(i, i));
            } else if (inv.at(i, j) > kSingularTol) {
                return false;  // off-diagonal of an M-matrix must be nonpositive
            }
        }
    }
    if (s <= 0.0) return false;

    SquareMatrix bm = s * SquareMatrix::identity(n) - inv;
    for (double& v : bm.data()) v = std::max(v, 0.0);  // clear sign noise
    const double rho = spectral_radius(spectrum(bm));
    return s > rho + 1e-12 * std::max(1.0, s);
}

GeneratorUniqueness generator_uniqueness_check(const SquareMatrix& p) {
    double min_diag = p.at(0, 0);
    double prod_diag = 1.0;
    for (int i = 0; i < p.dim(); ++i) {
        min_diag = std::min(min_diag, p.at(i, i));
        prod_diag *= p.at(i, i);
    }
    if (min_diag > 0.5) return GeneratorUniqueness::unique;
    if (min_diag * p.determinant() > std::exp(-std::acos(-1.0)) * prod_diag)
        return GeneratorUniqueness::unique;
    return GeneratorUniqueness::inconclusive;
}

double spectral_norm(const SquareMatrix& m) {
    const int n = m.dim();
    if (m.max_abs() == 0.0) return 0.0;

    // Power iteration on M^T M; the ramped start vector avoids symmetric
    // starting points that are orthogonal to the leading singular vector.
    std::vector<double> v(n);
    double vnorm = 0.0;
    for (int i = 0; i < n; ++i) {
        v[i] = 1.0 + 0.01 * i;
        vnorm += v[i] * v[i];
    }
    vnorm = std::sqrt(vnorm);
    for (double& x : v) x /= vnorm;

    std::vector<double> mv(n), w(n);
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += m.at(i, j) * v[j];
            mv[i] = s;
        }
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += m.at(i, j) * mv[i];
            w[j] = s;
        }
        double next = 0.0;
        for (int i = 0; i < n; ++i) next += v[i] * w[i];

        double wnorm = 0.0;
        for (double x : w) wnorm += x * x;
        wnorm = std::sqrt(wnorm);
        if (wnorm == 0.0) return 0.0;
        for (int i = 0; i < n; ++i) v[i] = w[i] / wnorm;

        if (std::fabs(next - lambda) <= 1e-10 * std::max(1.0, std::fabs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace rtme
