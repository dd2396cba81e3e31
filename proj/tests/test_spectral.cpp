#include "oracles.hpp"

#include "sdns/spectral.hpp"

#include <doctest.h>

#include <limits>
#include <random>

using namespace sdns;

TEST_CASE("truncation defaults and validation") {
    const TruncationSpec t(32);
    CHECK(t.grid_points() == 128);
    CHECK(t.dealias_cutoff() == 21);
    CHECK(t.side() == 65);
    CHECK(TruncationSpec(7).grid_points() == 16);
    CHECK(TruncationSpec(8).grid_points() == 32);
    CHECK_THROWS_AS(TruncationSpec(1), std::invalid_argument);
    CHECK_THROWS_AS(TruncationSpec(8, 24, 5), std::invalid_argument);  // not a power of two
    CHECK_THROWS_AS(TruncationSpec(8, 16, 5), std::invalid_argument);  // below 2K + 2
    CHECK_THROWS_AS(TruncationSpec(8, 32, 9), std::invalid_argument);  // cutoff beyond K
    CHECK_NOTHROW(TruncationSpec(8, 64, 5));
}

TEST_CASE("mode index round trip") {
    const TruncationSpec t(5);
    for (std::size_t i = 0; i < t.mode_count(); ++i) CHECK(t.index(t.wavevector(i)) == i);
    CHECK(t.wavevector(0) == Wavevector{-5, -5});
    CHECK(t.wavevector(1) == Wavevector{-5, -4});
}

TEST_CASE("set keeps the field real and rejects invalid modes") {
    const TruncationSpec t(4);
    SpectralField f(t);
    f.set({1, -2}, {0.5, 0.25});
    CHECK(f[{-1, 2}] == Complex{0.5, -0.25});
    CHECK(f.symmetry_defect() == 0.0);
    CHECK(f[{9, 9}] == Complex{});
    CHECK_THROWS(f.set({0, 0}, {1.0, 0.0}));
    CHECK_THROWS(f.set({5, 0}, {1.0, 0.0}));
    CHECK_THROWS(f.set({1, 0}, {std::numeric_limits<double>::quiet_NaN(), 0.0}));
}

TEST_CASE("cos(x1)/pi example") {
    const TruncationSpec t(4);
    SpectralField f(t);
    f.set({1, 0}, {1.0, 0.0});
    const GridField g = to_grid(f);
    const int n = g.points;
    for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; j2 += 3) CHECK(g.at(j1, j2) == doctest::Approx(std::cos(oracle::grid_x(j1, n)) / oracle::kPi).epsilon(1e-13));
}

TEST_CASE("grid transforms agree with direct summation") {
    std::mt19937_64 rng(11);
    for (int K : {2, 3, 4}) {
        const TruncationSpec t(K);
        const SpectralField f = oracle::random_field(t, K, rng);
        const GridField g = to_grid(f);
        const int n = g.points;
        double err = 0.0;
        for (int j1 = 0; j1 < n; ++j1)
            for (int j2 = 0; j2 < n; ++j2)
                err = std::max(err, std::abs(g.at(j1, j2) - oracle::evaluate(f, oracle::grid_x(j1, n), oracle::grid_x(j2, n))));
        CHECK(err < 1e-13);

        // forward transform against the quadrature projection of the same samples
        const SpectralField back = from_grid(g);
        double proj_err = 0.0;
        for (std::size_t i = 0; i < t.mode_count(); ++i) {
            const Wavevector k = t.wavevector(i);
            if (k.is_zero()) continue;
            proj_err = std::max(proj_err, std::abs(back[k] - oracle::project_mode(g.values, n, k)));
            proj_err = std::max(proj_err, std::abs(back[k] - f[k]));
        }
        CHECK(proj_err < 1e-13);
    }
}

TEST_CASE("transforms on an oversampled grid") {
    std::mt19937_64 rng(12);
    const TruncationSpec t(6);
    const SpectralField f = oracle::random_field(t, 6, rng);
    const GridField g = to_grid(f, 64);
    CHECK(g.points == 64);
    CHECK(g.at(5, 17) == doctest::Approx(oracle::evaluate(f, oracle::grid_x(5, 64), oracle::grid_x(17, 64))).epsilon(1e-12));
    const SpectralField back = from_grid(g);
    CHECK((back - f).symmetry_defect() < 1e-13);
    CHECK(oracle::sobolev_sq(back - f, 0) < 1e-26);
    CHECK_THROWS(to_grid(f, 12));
    CHECK_THROWS(to_grid(f, 8));
}

TEST_CASE("Biot-Savart: divergence free, curl inverse, H^-1 isometry") {
    std::mt19937_64 rng(13);
    const TruncationSpec t(10);
    const SpectralField xi = oracle::random_field(t, 10, rng);
    const VelocityField u = biot_savart(xi);
    CHECK(u.divergence_defect() < 1e-14);
    CHECK(oracle::sobolev_sq(curl(u) - xi, 0) < 1e-26);
    const double u2 = oracle::sobolev_sq(u.u1, 0) + oracle::sobolev_sq(u.u2, 0);
    CHECK(u2 == doctest::Approx(oracle::sobolev_sq(xi, -1)).epsilon(1e-13));
    CHECK(sobolev_norm(u, 0.0) == doctest::Approx(std::sqrt(u2)).epsilon(1e-13));
}

TEST_CASE("differential operators mode by mode") {
    const TruncationSpec t(4);
    SpectralField f(t);
    f.set({2, -1}, {1.0, 2.0});
    CHECK(derivative(f, 0)[{2, -1}] == Complex{0.0, 2.0} * Complex{1.0, 2.0});
    CHECK(derivative(f, 1)[{2, -1}] == Complex{0.0, -1.0} * Complex{1.0, 2.0});
    CHECK(laplacian(f)[{2, -1}] == -5.0 * Complex{1.0, 2.0});
    CHECK(inverse_laplacian(laplacian(f))[{2, -1}] == Complex{1.0, 2.0});
    CHECK_THROWS(derivative(f, 2));
    CHECK(project(f, 1)[{2, -1}] == Complex{});
}

TEST_CASE("nonlinear term equals the direct convolution") {
    std::mt19937_64 rng(14);
    for (int K : {4, 6, 9}) {
        const TruncationSpec t(K);
        const SpectralField xi = oracle::random_field(t, t.dealias_cutoff(), rng);
        const SpectralField fast = nonlinear_term(xi);
        const SpectralField slow = oracle::convolution_nonlinear(xi);
        const double scale = std::sqrt(oracle::sobolev_sq(slow, 0));
        CHECK(std::sqrt(oracle::sobolev_sq(fast - slow, 0)) <= 1e-13 * scale);
        for (std::size_t i = 0; i < t.mode_count(); ++i) {
            if (t.wavevector(i).sup_norm() > t.dealias_cutoff()) CHECK(fast.coefficients()[i] == Complex{});
        }
    }
}

TEST_CASE("two equal-norm modes do not interact") {
    const TruncationSpec t(6);
    SpectralField xi(t);
    xi.set({1, 0}, {1.0, 0.0});
    xi.set({0, 1}, {0.3, -0.7});
    CHECK(oracle::sobolev_sq(nonlinear_term(xi), 0) < 1e-28);
}

TEST_CASE("conservation and skew symmetry at K = 16") {
    std::mt19937_64 rng(15);
    const TruncationSpec t(16);
    const int band = t.dealias_cutoff();
    for (int trial = 0; trial < 10; ++trial) {
        const SpectralField xi = oracle::random_field(t, band, rng);
        const SpectralField n = nonlinear_term(xi);
        const double scale = std::sqrt(oracle::sobolev_sq(n, 0) * oracle::sobolev_sq(xi, 0));
        CHECK(std::abs(inner_product(n, xi)) <= 1e-12 * scale);
        const SpectralField psi = inverse_laplacian(xi);
        CHECK(std::abs(inner_product(n, psi)) <= 1e-12 * std::sqrt(oracle::sobolev_sq(n, 0) * oracle::sobolev_sq(psi, 0)));

        const VelocityField u = biot_savart(oracle::random_field(t, band, rng));
        const SpectralField f = oracle::random_field(t, band, rng);
        const SpectralField g = oracle::random_field(t, band, rng);
        const double a = inner_product(advect(u, f), g);
        const double b = inner_product(advect(u, g), f);
        CHECK(std::abs(a + b) <= 1e-12 * (std::abs(a) + std::abs(b)));
    }
}

TEST_CASE("norms: Parseval and oversampled L4 quadrature") {
    std::mt19937_64 rng(16);
    const TruncationSpec t(5);
    const SpectralField f = oracle::random_field(t, 3, rng);
    CHECK(lp_norm(f, 2.0) == doctest::Approx(sobolev_norm(f, 0.0)).epsilon(1e-13));
    CHECK(sobolev_norm(f, 1.0) == doctest::Approx(std::sqrt(oracle::sobolev_sq(f, 1))).epsilon(1e-13));

    // f^4 has modes up to 4 * 3 = 12; a 32-point grid integrates it exactly.
    const int n = 32;
    double direct = 0.0;
    for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; ++j2) direct += std::pow(oracle::evaluate(f, oracle::grid_x(j1, n), oracle::grid_x(j2, n)), 4);
    direct *= std::pow(2.0 * oracle::kPi / n, 2);
    CHECK(std::pow(lp_norm(f, 4.0, n), 4) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(std::pow(lp_norm(f, 4.0, 64), 4) == doctest::Approx(direct).epsilon(1e-12));
    CHECK_THROWS(lp_norm(f, 0.5));
}

TEST_CASE("mismatched truncations and non-finite data are rejected") {
    const SpectralField a(TruncationSpec(4));
    const SpectralField b(TruncationSpec(5));
    CHECK_THROWS_AS(inner_product(a, b), TruncationMismatch);
    CHECK_THROWS_AS(advect(biot_savart(a), b), TruncationMismatch);

    SpectralField bad(TruncationSpec(4));
    bad.coefficients()[bad.truncation().index({1, 1})] = Complex{std::numeric_limits<double>::infinity(), 0.0};
    CHECK_FALSE(bad.all_finite());
    CHECK_THROWS_AS(to_grid(bad), NonFiniteError);
    CHECK_THROWS_AS(nonlinear_term(bad), NonFiniteError);
}
