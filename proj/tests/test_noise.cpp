#include "oracles.hpp"

#include "sdns/noise.hpp"
#include "sdns/rng.hpp"

#include <doctest.h>

#include <random>

using namespace sdns;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal draws are a pure function of (seed, stream, step, mode)") {
    RngState a{7, 3, 11};
    RngState b{7, 3, 11};
    CHECK(a.normal_pair(5) == b.normal_pair(5));
    CHECK(a.normal_pair(5) != a.normal_pair(6));
    CHECK(a.normal_pair(5) != RngState{7, 4, 11}.normal_pair(5));
    CHECK(a.normal_pair(5) != RngState{8, 3, 11}.normal_pair(5));
    b.advance();
    CHECK(b.step == 12);
    CHECK(a.normal_pair(5) != b.normal_pair(5));
}

TEST_CASE("normal draws have unit variance and no correlation") {
    RngState r{1, 0, 0};
    const int n = 200000;
    double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0, s4 = 0;
    for (int i = 0; i < n; ++i, r.advance()) {
        const auto [x, y] = r.normal_pair(0);
        s1 += x;
        s2 += y;
        s11 += x * x;
        s22 += y * y;
        s12 += x * y;
        s4 += x * x * x * x;
    }
    const double sd = 1.0 / std::sqrt(double(n));
    CHECK(std::abs(s1 / n) < 4 * sd);
    CHECK(std::abs(s2 / n) < 4 * sd);
    CHECK(std::abs(s11 / n - 1.0) < 4 * std::sqrt(2.0) * sd);
    CHECK(std::abs(s22 / n - 1.0) < 4 * std::sqrt(2.0) * sd);
    CHECK(std::abs(s12 / n) < 4 * sd);
    CHECK(std::abs(s4 / n - 3.0) < 4 * std::sqrt(96.0) * sd);
}

TEST_CASE("noise spec bookkeeping") {
    const TruncationSpec t(8);
    const NoiseSpec d = NoiseSpec::default_forcing(t);
    CHECK(total_q(d) == 6.0);
    CHECK(total_q_velocity(d) == 4.0);
    CHECK(d.q({-1, 0}) == 1.0);
    CHECK(d.q({-1, -1}) == 1.0);
    CHECK(d.q({2, 0}) == 0.0);
    CHECK(d.forced_modes().size() == 2);

    NoiseSpec s(t);
    CHECK(s.empty());
    CHECK_THROWS(s.add({0, 0}, 1.0));
    CHECK_THROWS(s.add({9, 0}, 1.0));
    CHECK_THROWS(s.add({1, 0}, -1.0));
    s.add({-1, 0}, 1.0);  // stored as its half-lattice representative (1, 0)
    CHECK_THROWS(s.add({1, 0}, 2.0));
    s.add({1, 1}, 1.0);
    CHECK(s == d);
    CHECK(s.hash() == d.hash());

    NoiseSpec other(t);
    other.add({1, 0}, 1.0);
    other.add({1, 1}, 1.5);
    CHECK(other.hash() != d.hash());
    CHECK(NoiseSpec::default_forcing(TruncationSpec(9)).hash() != d.hash());
}

TEST_CASE("forcing condition on reference sets") {
    const TruncationSpec t(8);
    const HMReport d = check_hm_condition(NoiseSpec::default_forcing(t));
    CHECK(d.pass);
    CHECK(d.summary() == "PASS: norms {1,√2}, lattice generated");
    CHECK(d.forced_set.size() == 4);

    auto report = [&](std::initializer_list<std::pair<Wavevector, double>> modes) {
        NoiseSpec s(t);
        for (const auto& [k, q] : modes) s.add(k, q);
        return check_hm_condition(s);
    };
    const HMReport even = report({{{2, 0}, 1.0}, {{2, 2}, 1.0}});
    CHECK(even.has_two_norms);
    CHECK_FALSE(even.generates_lattice);
    CHECK_FALSE(even.pass);

    const HMReport one_norm = report({{{1, 0}, 1.0}, {{0, 1}, 1.0}});
    CHECK(one_norm.generates_lattice);
    CHECK_FALSE(one_norm.has_two_norms);
    CHECK_FALSE(one_norm.pass);

    CHECK(report({{{1, 0}, 1.0}, {{2, 1}, 1.0}}).pass);
    CHECK_FALSE(report({{{1, 0}, 1.0}}).pass);
    CHECK_FALSE(report({{{1, 0}, 0.0}, {{1, 1}, 1.0}}).pass);  // q = 0 is not forced
    CHECK_FALSE(check_hm_condition(NoiseSpec(t)).pass);
}

TEST_CASE("forcing condition is invariant under negating forced modes") {
    const TruncationSpec t(6);
    std::mt19937 rng(6);
    std::uniform_int_distribution<int> coord(-3, 3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Wavevector> modes;
        for (int i = 0; i < 3; ++i) {
            const Wavevector k{coord(rng), coord(rng)};
            if (!k.is_zero()) modes.push_back(k);
        }
        NoiseSpec a(t), b(t);
        bool ok = true;
        for (std::size_t i = 0; i < modes.size(); ++i) {
            const Wavevector& k = modes[i];
            const Wavevector flipped = (i % 2 == 0) ? Wavevector{-k.k1, -k.k2} : k;
            try {
                a.add(k, 1.0);
                b.add(flipped, 1.0);
            } catch (const std::invalid_argument&) {
                ok = false;  // repeated mode
                break;
            }
        }
        if (!ok) continue;
        CHECK(check_hm_condition(a).pass == check_hm_condition(b).pass);
        CHECK(a == b);
    }
}

TEST_CASE("lattice generation agrees with the gcd of 2x2 minors") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> coord(-6, 6);
    std::uniform_int_distribution<int> count(1, 4);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Wavevector> modes;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            Wavevector k{coord(rng), coord(rng)};
            if (!k.is_zero()) modes.push_back(k);
        }
        CHECK(lattice_index(modes) == oracle::gcd_of_minors(modes));
    }
}

TEST_CASE("curl increments: second-moment law over 1e5 draws") {
    const TruncationSpec t(8);
    const NoiseSpec spec = NoiseSpec::default_forcing(t);
    const double h = 0.01;
    RngState rng{1, 0, 0};
    const int n = 100000;
    double total = 0.0, m10 = 0.0, m11 = 0.0, mean_re = 0.0;
    for (int i = 0; i < n; ++i) {
        const SpectralField w = sample_curl_increment(spec, h, rng);
        total += oracle::sobolev_sq(w, 0);
        m10 += std::norm(w[{1, 0}]);
        m11 += std::norm(w[{1, 1}]);
        mean_re += w[{1, 1}].real();
        CHECK_FALSE(w.symmetry_defect() > 0.0);
    }
    CHECK(rng.step == static_cast<std::uint64_t>(n));
    CHECK(total / n / h == doctest::Approx(2.0 * total_q(spec)).epsilon(0.02));
    CHECK(m10 / n == doctest::Approx(2.0 * h * 1.0).epsilon(0.03));
    CHECK(m11 / n == doctest::Approx(2.0 * h * 2.0).epsilon(0.03));
    CHECK(std::abs(mean_re / n) < 4.0 * std::sqrt(2.0 * h / n));
}

TEST_CASE("four increments of h/4 have the law of one increment of h") {
    const TruncationSpec t(6);
    const NoiseSpec spec = NoiseSpec::default_forcing(t);
    const double h = 0.02;
    RngState a{3, 0, 0};
    RngState b{3, 1, 0};
    const int n = 40000;
    double one = 0.0, four = 0.0;
    for (int i = 0; i < n; ++i) {
        one += oracle::sobolev_sq(sample_curl_increment(spec, h, a), 0);
        SpectralField sum(t);
        for (int j = 0; j < 4; ++j) sum += sample_curl_increment(spec, h / 4, b);
        four += oracle::sobolev_sq(sum, 0);
    }
    CHECK(one / n == doctest::Approx(2.0 * h * total_q(spec)).epsilon(0.03));
    CHECK(four / n == doctest::Approx(one / n).epsilon(0.04));
    CHECK_THROWS(sample_curl_increment(spec, -1.0, a));
}

TEST_CASE("stationary moments of the linear system") {
    const NoiseSpec spec = NoiseSpec::default_forcing(TruncationSpec(8));
    CHECK(ou_mode_variance(spec, {1, 0}, 0.1, 1.0) == doctest::Approx(1.0 / 1.1));
    CHECK(ou_mode_variance(spec, {-1, -1}, 0.1, 1.0) == doctest::Approx(2.0 / 1.2));
    const OuMoments m = ou_stationary_moments(spec, 0.1, 1.0);
    CHECK(m.enstrophy == doctest::Approx(170.0 / 33.0).epsilon(1e-14));
    CHECK(m.enstrophy == doctest::Approx(oracle::ou_enstrophy({{{1, 0}, 1.0}, {{1, 1}, 1.0}}, 0.1, 1.0)).epsilon(1e-14));
    CHECK(m.energy == doctest::Approx(2.0 * (1.0 / 1.1 + 1.0 / 1.2)).epsilon(1e-14));
    CHECK(m.palinstrophy_weighted == doctest::Approx(0.1 * 2.0 * (1.0 / 1.1 + 4.0 / 1.2)).epsilon(1e-14));
    // enstrophy balance nu P + gamma Z = Q
    CHECK(m.palinstrophy_weighted + m.enstrophy == doctest::Approx(total_q(spec)).epsilon(1e-14));
    const OuMoments inviscid = ou_stationary_moments(spec, 0.0, 1.0);
    CHECK(inviscid.enstrophy == doctest::Approx(6.0));
    CHECK(inviscid.palinstrophy_weighted == 0.0);
    CHECK_THROWS(ou_stationary_moments(spec, 0.1, 0.0));
}
