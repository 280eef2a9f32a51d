#include "seeopt/spectral.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace seeopt;

namespace {

// relative difference with a floor that treats near-underflow values as equal
double rel_diff(double a, double b) {
    const double denom = std::max(std::abs(a), std::abs(b));
    if (denom < 1e-280) return 0.0;
    return std::abs(a - b) / denom;
}

} // namespace

TEST_CASE("semigroup at t = 0 is the identity", "[spectral]") {
    const auto basis = SpectralBasis::dirichlet_laplacian(4);
    SpectralVector v(4);
    v << 1.0, -2.0, 0.25, 3.5;
    const SpectralVector out = semigroup_apply(basis, 0.0, v);
    REQUIRE(out == v);
}

TEST_CASE("semigroup matches the scalar exponential", "[spectral]") {
    // lambda_1 = -pi^2, t = 1: first coefficient decays by exp(-pi^2),
    // computed independently as 5.172318620381234e-05
    const auto basis = SpectralBasis::dirichlet_laplacian(3);
    SpectralVector v = SpectralVector::Zero(3);
    v[0] = 1.0;
    const SpectralVector out = semigroup_apply(basis, 1.0, v);
    REQUIRE(out[0] == Catch::Approx(5.172318620381234e-05).epsilon(1e-14));
    REQUIRE(out[1] == 0.0);
    REQUIRE(out[2] == 0.0);
}

TEST_CASE("adjoint semigroup equals semigroup for the self-adjoint spectrum",
          "[spectral]") {
    const auto basis = SpectralBasis::dirichlet_laplacian(5, 0.3);
    rng::StreamRng gen(11);
    SpectralVector v(5);
    for (int i = 0; i < 5; ++i) v[i] = gen.normal();
    for (double t : {0.0, 0.1, 0.7, 2.0}) {
        const SpectralVector a = semigroup_apply(basis, t, v);
        const SpectralVector b = adjoint_semigroup_apply(basis, t, v);
        REQUIRE(a == b); // bit for bit
    }
}

TEST_CASE("adjoint semigroup hand example: lambda = -1, t = ln 2 halves", "[spectral]") {
    SpectralBasis basis{(Eigen::VectorXd(1) << -1.0).finished()};
    SpectralVector v(1);
    v << 4.0;
    const SpectralVector out = adjoint_semigroup_apply(basis, std::log(2.0), v);
    REQUIRE(out[0] == Catch::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("semigroup law S(t+s) = S(t) S(s) and contraction", "[spectral]") {
    const auto basis = SpectralBasis::dirichlet_laplacian(8);
    rng::StreamRng gen(1234);
    for (int trial = 0; trial < 200; ++trial) {
        SpectralVector v(8);
        for (int i = 0; i < 8; ++i) v[i] = 2.0 * gen.normal();
        const double t = gen.uniform();
        const double s = gen.uniform();
        const SpectralVector once = semigroup_apply(basis, t + s, v);
        const SpectralVector twice = semigroup_apply(basis, t, semigroup_apply(basis, s, v));
        for (int i = 0; i < 8; ++i)
            REQUIRE(rel_diff(once[i], twice[i]) < 1e-12);
        REQUIRE(once.norm() <= v.norm() * (1.0 + 1e-15));
    }
}

TEST_CASE("semigroup rejects negative time", "[spectral]") {
    const auto basis = SpectralBasis::dirichlet_laplacian(2);
    const SpectralVector v = SpectralVector::Ones(2);
    REQUIRE_THROWS_AS(semigroup_apply(basis, -0.1, v), std::invalid_argument);
    REQUIRE_THROWS_AS(adjoint_semigroup_apply(basis, -1e-9, v), std::invalid_argument);
}

TEST_CASE("default spectrum is negative and strictly decreasing", "[spectral]") {
    const auto basis = SpectralBasis::dirichlet_laplacian(6);
    for (int k = 0; k < 6; ++k) {
        REQUIRE(basis.eigenvalues[k] < 0.0);
        if (k > 0) REQUIRE(basis.eigenvalues[k] < basis.eigenvalues[k - 1]);
    }
}

TEST_CASE("hs_inner of identities is the dimension", "[spectral]") {
    REQUIRE(hs_inner(HSMatrix::Identity(3, 3), HSMatrix::Identity(3, 3)) == 3.0);
    REQUIRE(hs_inner(HSMatrix::Random(4, 4), HSMatrix::Zero(4, 4)) == 0.0);
}

TEST_CASE("hs_inner matches the brute-force double loop", "[spectral]") {
    rng::StreamRng gen(77);
    for (int trial = 0; trial < 20; ++trial) {
        HSMatrix m1(5, 5), m2(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                m1(i, j) = gen.normal();
                m2(i, j) = gen.normal();
            }
        double oracle = 0.0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) oracle += m1(i, j) * m2(i, j);
        REQUIRE(hs_inner(m1, m2) == Catch::Approx(oracle).margin(1e-13));
    }
}

TEST_CASE("hs_inner is symmetric, bilinear and positive definite", "[spectral]") {
    rng::StreamRng gen(78);
    for (int trial = 0; trial < 50; ++trial) {
        HSMatrix a(3, 3), b(3, 3), c(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                a(i, j) = gen.normal();
                b(i, j) = gen.normal();
                c(i, j) = gen.normal();
            }
        const double alpha = gen.uniform(-2.0, 2.0);
        REQUIRE(hs_inner(a, b) == Catch::Approx(hs_inner(b, a)).margin(1e-14));
        REQUIRE(hs_inner(alpha * a + b, c) ==
                Catch::Approx(alpha * hs_inner(a, c) + hs_inner(b, c)).margin(1e-12));
        REQUIRE(hs_inner(a, a) >= 0.0);
    }
    REQUIRE(hs_inner(HSMatrix::Zero(2, 2), HSMatrix::Zero(2, 2)) == 0.0);
}

TEST_CASE("hs_inner rejects shape mismatch", "[spectral]") {
    REQUIRE_THROWS_AS(hs_inner(HSMatrix::Zero(2, 2), HSMatrix::Zero(3, 3)),
                      std::invalid_argument);
}

TEST_CASE("wiener increments are reproducible and shape-stable", "[spectral]") {
    const auto basis = SpectralBasis::dirichlet_laplacian(3);
    const auto w1 = sample_wiener_increments(basis, 0.05, 4, 6, 999);
    const auto w2 = sample_wiener_increments(basis, 0.05, 4, 6, 999);
    REQUIRE(w1.n_paths() == 6);
    for (int p = 0; p < 6; ++p) REQUIRE(w1.path(p) == w2.path(p));

    // enlarging the tensor preserves shared cells
    const auto big = sample_wiener_increments(basis, 0.05, 7, 9, 999);
    for (int p = 0; p < 6; ++p)
        REQUIRE(big.path(p).topRows(4) == w1.path(p));

    const auto other = sample_wiener_increments(basis, 0.05, 4, 6, 1000);
    REQUIRE(other.path(0) != w1.path(0));
}

TEST_CASE("wiener increments have Normal(0, dt) moments", "[spectral]") {
    const auto basis = SpectralBasis::dirichlet_laplacian(1);
    const double dt = 0.02;
    const int n = 100000;
    const auto w = sample_wiener_increments(basis, dt, 1, n, 31415);
    double sum = 0.0, sum2 = 0.0;
    for (int p = 0; p < n; ++p) {
        const double x = w.path(p)(0, 0);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double se_mean = std::sqrt(dt / n);
    REQUIRE(std::abs(mean) < 4.0 * se_mean);
    REQUIRE(var == Catch::Approx(dt).epsilon(0.05));
}

TEST_CASE("wiener sampling is independent of the worker count", "[spectral]") {
    const auto basis = SpectralBasis::dirichlet_laplacian(4);
    exec::max_threads() = 1;
    const auto serial = sample_wiener_increments(basis, 0.1, 6, 40, 12345);
    exec::max_threads() = 3;
    const auto parallel = sample_wiener_increments(basis, 0.1, 6, 40, 12345);
    exec::max_threads() = 0;
    for (int p = 0; p < 40; ++p) REQUIRE(serial.path(p) == parallel.path(p));
}

TEST_CASE("wiener sampling validates its arguments", "[spectral]") {
    const auto basis = SpectralBasis::dirichlet_laplacian(2);
    REQUIRE_THROWS_AS(sample_wiener_increments(basis, 0.0, 4, 2, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_wiener_increments(basis, -0.1, 4, 2, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_wiener_increments(basis, 0.1, 0, 2, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_wiener_increments(basis, 0.1, 4, 0, 1), std::invalid_argument);
}
