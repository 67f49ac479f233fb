#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "rtme/error.hpp"
#include "rtme/matfun.hpp"
#include "rtme/markov.hpp"
#include "rtme/rng.hpp"
#include "test_support.hpp"

using namespace rtme;

namespace {

bool is_error(const Error& e, const char* code) { return e.code() == code; }

}  // namespace

TEST_CASE("mat_exp of the zero matrix is exactly the identity") {
    SquareMatrix z(3);
    SquareMatrix e = mat_exp(z);
    CHECK(e == SquareMatrix::identity(3));
}

TEST_CASE("mat_exp of a diagonal matrix exponentiates the diagonal") {
    SquareMatrix q(2);
    q.at(0, 0) = std::log(2.0);
    q.at(1, 1) = std::log(3.0);
    SquareMatrix e = mat_exp(q);
    CHECK(e.at(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(e.at(1, 1) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(std::fabs(e.at(0, 1)) < 1e-14);
    CHECK(std::fabs(e.at(1, 0)) < 1e-14);
}

TEST_CASE("mat_exp matches the closed form for a rank-one generator") {
    // Q^2 = -0.9 Q, so exp(Q) = I + (1 - e^{-0.9})/0.9 * Q.
    SquareMatrix q = SquareMatrix::from_rows({{-0.3, 0.3}, {0.6, -0.6}});
    const double phi = -std::expm1(-0.9) / 0.9;
    SquareMatrix expected = SquareMatrix::identity(2) + q * phi;
    CHECK(max_abs_diff(mat_exp(q), expected) < 1e-13);
}

TEST_CASE("mat_exp rejects magnitudes that overflow doubles") {
    SquareMatrix q(2);
    q.at(0, 0) = 800.0;
    q.at(1, 1) = 800.0;
    try {
        mat_exp(q);
        FAIL("expected Overflow");
    } catch (const Error& e) {
        CHECK(is_error(e, "Overflow"));
    }
}

TEST_CASE("mat_log_principal matches the 2x2 closed form") {
    // A - I has A^2 - ... eigenvalues {1, 0.7}: log A = ln(0.7)/(-0.3) (A - I).
    SquareMatrix a = SquareMatrix::from_rows({{0.9, 0.1}, {0.2, 0.8}});
    SquareMatrix expected = (a - SquareMatrix::identity(2)) * (std::log(0.7) / -0.3);
    CHECK(max_abs_diff(mat_log_principal(a), expected) < 1e-12);
}

TEST_CASE("mat_log_principal of the identity is zero") {
    CHECK(mat_log_principal(SquareMatrix::identity(4)).max_abs() < 1e-15);
}

TEST_CASE("exp(log(A)) reproduces well-conditioned stochastic matrices") {
    for (int states : {3, 5}) {
        SquareMatrix a = default_transition_matrix(states).matrix();
        CHECK(max_abs_diff(mat_exp(mat_log_principal(a)), a) < 1e-9);
        SquareMatrix a8 = matrix_power(default_transition_matrix(states), 8).matrix();
        CHECK(max_abs_diff(mat_exp(mat_log_principal(a8)), a8) < 1e-9);
    }
}

TEST_CASE("mat_log_principal refuses eigenvalues on the negative half-line") {
    SquareMatrix a(2);
    a.at(0, 0) = -0.05;
    a.at(1, 1) = 0.5;
    try {
        mat_log_principal(a);
        FAIL("expected NegativeEigenvalue");
    } catch (const Error& e) {
        CHECK(is_error(e, "NegativeEigenvalue"));
    }
}

TEST_CASE("mat_log_principal refuses near-singular input") {
    SquareMatrix a(2);
    a.at(0, 0) = 1e-14;
    a.at(1, 1) = 1.0;
    try {
        mat_log_principal(a);
        FAIL("expected Singular");
    } catch (const Error& e) {
        CHECK(is_error(e, "Singular"));
    }
}

TEST_CASE("spectrum of the identity") {
    Spectrum s = spectrum(SquareMatrix::identity(3));
    for (const auto& ev : s.eigenvalues) CHECK(std::abs(ev - 1.0) < 1e-12);
    CHECK(s.min_modulus == doctest::Approx(1.0));
    CHECK(s.dist_to_neg_axis == doctest::Approx(1.0));
}

TEST_CASE("spectrum of a 2x2 stochastic matrix: {1, 0.7}") {
    Spectrum s = spectrum(SquareMatrix::from_rows({{0.9, 0.1}, {0.2, 0.8}}));
    CHECK(std::abs(s.eigenvalues[0] - 0.7) < 1e-12);
    CHECK(std::abs(s.eigenvalues[1] - 1.0) < 1e-12);
    CHECK(s.dist_to_neg_axis == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("spectrum of a permutation: {1, -1} touches the negative axis") {
    Spectrum s = spectrum(SquareMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
    CHECK(std::abs(s.eigenvalues[0] + 1.0) < 1e-12);
    CHECK(std::abs(s.eigenvalues[1] - 1.0) < 1e-12);
    CHECK(s.dist_to_neg_axis < 1e-12);
    CHECK(s.min_modulus == doctest::Approx(1.0));
}

TEST_CASE("dist_to_neg_axis uses |Im| left of the axis and |z| right of it") {
    // Eigenvalues 0.3 +/- 0.4i: distance should be |z| = 0.5.
    SquareMatrix a = SquareMatrix::from_rows({{0.3, 0.4}, {-0.4, 0.3}});
    CHECK(spectrum(a).dist_to_neg_axis == doctest::Approx(0.5).epsilon(1e-10));
    // Eigenvalues -0.2 +/- 0.9i: distance is |Im| = 0.9.
    SquareMatrix b = SquareMatrix::from_rows({{-0.2, 0.9}, {-0.9, -0.2}});
    CHECK(spectrum(b).dist_to_neg_axis == doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("mercator_log: identity gives zero for any term count") {
    CHECK(mercator_log(SquareMatrix::identity(3), 1).max_abs() == 0.0);
    CHECK(mercator_log(SquareMatrix::identity(3), 50).max_abs() == 0.0);
}

TEST_CASE("mercator_log with 60 terms matches the principal log") {
    SquareMatrix a = SquareMatrix::from_rows({{0.9, 0.1}, {0.2, 0.8}});
    CHECK(max_abs_diff(mercator_log(a, 60), mat_log_principal(a)) < 1e-10);
}

TEST_CASE("mercator_log flags divergence when rho(A - I) >= 1") {
    SquareMatrix a = SquareMatrix::from_rows({{1.0, 1.2}, {1.2, 1.0}});
    try {
        mercator_log(a, 30);
        FAIL("expected DivergenceRisk");
    } catch (const Error& e) {
        CHECK(is_error(e, "DivergenceRisk"));
    }
}

TEST_CASE("is_m_matrix_inverse on the reference matrices, identity, permutation") {
    CHECK(is_m_matrix_inverse(default_transition_matrix(3).matrix()));
    CHECK(is_m_matrix_inverse(default_transition_matrix(5).matrix()));
    CHECK(is_m_matrix_inverse(SquareMatrix::identity(3)));
    CHECK_FALSE(is_m_matrix_inverse(SquareMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}})));
    // Singular input: false, not an error.
    CHECK_FALSE(is_m_matrix_inverse(SquareMatrix::from_rows({{1.0, 1.0}, {1.0, 1.0}})));
}

TEST_CASE("generator_uniqueness_check") {
    CHECK(generator_uniqueness_check(default_transition_matrix(3).matrix()) ==
          GeneratorUniqueness::unique);
    CHECK(generator_uniqueness_check(default_transition_matrix(5).matrix()) ==
          GeneratorUniqueness::unique);
    CHECK(generator_uniqueness_check(SquareMatrix::identity(3)) == GeneratorUniqueness::unique);
    // min diagonal 0.4 and condition (b) fails: det < 0.
    SquareMatrix p = SquareMatrix::from_rows({{0.4, 0.6}, {0.6, 0.4}});
    CHECK(generator_uniqueness_check(p) == GeneratorUniqueness::inconclusive);
}

TEST_CASE("round trip: log(exp(G)) = G over random generators") {
    Rng rng(0x5eed0001);
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        const int dim = trial % 2 == 0 ? 3 : 5;
        SquareMatrix g = test::random_generator(rng, dim, 2.0);
        worst = std::max(worst, max_abs_diff(mat_log_principal(mat_exp(g)), g));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("power identity: exp(l G) = exp(G)^l for l in 1..6") {
    Rng rng(0x5eed0002);
    for (int trial = 0; trial < 25; ++trial) {
        SquareMatrix g = test::random_generator(rng, 4, 1.5);
        SquareMatrix e = mat_exp(g);
        SquareMatrix pw = e;
        for (int l = 1; l <= 6; ++l) {
            CHECK(max_abs_diff(mat_exp(g * static_cast<double>(l)), pw) < 1e-9);
            pw = pw * e;
        }
    }
}

TEST_CASE("mercator agrees with the principal log when rho(A - I) <= 0.5") {
    Rng rng(0x5eed0003);
    for (int trial = 0; trial < 50; ++trial) {
        // exp of a small generator stays within the series radius.
        SquareMatrix g = test::random_generator(rng, 3, 0.4);
        SquareMatrix a = mat_exp(g);
        REQUIRE(spectral_radius(spectrum(a - SquareMatrix::identity(3))) <= 0.5);
        CHECK(max_abs_diff(mercator_log(a, 80), mat_log_principal(a)) < 1e-8);
    }
}

TEST_CASE("row-stochastic matrices carry an eigenvalue at 1") {
    Rng rng(0x5eed0004);
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 2 + static_cast<int>(rng.next_below(6));
        Spectrum s = spectrum(test::random_stochastic(rng, dim).matrix());
        double best = 1e9;
        for (const auto& ev : s.eigenvalues) best = std::min(best, std::abs(ev - 1.0));
        CHECK(best < 1e-10);
    }
}

TEST_CASE("exp of a generator is row-stochastic") {
    Rng rng(0x5eed0005);
    for (int trial = 0; trial < 200; ++trial) {
        SquareMatrix g = test::random_generator(rng, 3 + static_cast<int>(rng.next_below(3)), 2.0);
        CHECK_NOTHROW(validate_stochastic(mat_exp(g), 1e-10));
    }
}

TEST_CASE("spectral_norm matches hand values and eigen bounds") {
    CHECK(spectral_norm(SquareMatrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-9));
    // diag(3, -2): singular values {3, 2}.
    SquareMatrix d(2);
    d.at(0, 0) = 3.0;
    d.at(1, 1) = -2.0;
    CHECK(spectral_norm(d) == doctest::Approx(3.0).epsilon(1e-9));
    SquareMatrix zero(3);
    CHECK(spectral_norm(zero) == 0.0);
    // ones(2): sigma = 2.
    CHECK(spectral_norm(SquareMatrix::from_rows({{1.0, 1.0}, {1.0, 1.0}})) ==
          doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("solve and inverse recover known systems") {
    SquareMatrix a = SquareMatrix::from_rows({{4.0, 1.0}, {2.0, 3.0}});
    SquareMatrix inv = a.inverse();
    CHECK(max_abs_diff(a * inv, SquareMatrix::identity(2)) < 1e-14);
    CHECK(a.determinant() == doctest::Approx(10.0).epsilon(1e-13));
    SquareMatrix singular = SquareMatrix::from_rows({{1.0, 2.0}, {2.0, 4.0}});
    CHECK_THROWS_AS(singular.inverse(), Error);
    CHECK(singular.determinant() == 0.0);
}
