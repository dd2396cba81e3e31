#include "oracles.hpp"

#include "sdns/experiments.hpp"

#include <doctest.h>

#include <atomic>

using namespace sdns;

namespace {

SimParams linear_params(int K, double nu) {
    SimParams p;
    p.nu = nu;
    p.gamma = 1.0;
    p.h = 0.01;
    p.trunc = TruncationSpec(K);
    p.noise = NoiseSpec::default_forcing(p.trunc);
    p.nonlinear = false;
    return p;
}

StationaryOptions fast_options(unsigned workers = 2) {
    StationaryOptions o;
    o.burn_in = 5.0;
    o.n_batches = 20;
    o.observe_every = 5;
    o.workers = workers;
    return o;
}

SweepConfig linear_sweep() {
    SweepConfig cfg;
    cfg.nu_ladder = {0.02, 0.01, 0.005};
    cfg.replicas = 4;
    cfg.total_time = 150.0;
    cfg.base = linear_params(4, 0.0);
    cfg.options = fast_options(3);
    return cfg;
}

bool same(const Estimate& a, const Estimate& b) {
    return a.mean == b.mean && a.half_width == b.half_width && a.batches == b.batches;
}

}  // namespace

TEST_CASE("worker pool runs every job once and reports the first failure") {
    std::vector<int> hits(50, 0);
    std::atomic<int> total{0};
    parallel_jobs(hits.size(), 4, [&](std::size_t i) {
        ++hits[i];
        ++total;
    });
    CHECK(total == 50);
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    try {
        parallel_jobs(10, 3, [](std::size_t i) {
            if (i == 4 || i == 7) throw std::runtime_error("job " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "job 4");
    }
}

TEST_CASE("stationary run of the linear system reproduces the OU moments") {
    const SimParams p = linear_params(4, 0.1);
    const StationaryResult r = stationary_run(p, 200.0, 4, fast_options());
    REQUIRE(r.valid);
    CHECK(r.replicas_completed == 4);
    CHECK(r.report.batches >= 70);
    CHECK(std::abs(r.report.enstrophy.mean - 170.0 / 33.0) <= 3.0 * r.report.enstrophy.std_error);
    CHECK(std::abs(r.report.residual_enstrophy.mean) <= 3.0 * r.report.residual_enstrophy.std_error);
    // bin round(|k|) = 1 holds (1,0) and (1,1) with their mirrors
    REQUIRE(r.spectrum.size() >= 2);
    CHECK(r.spectrum[1] == doctest::Approx(170.0 / 33.0).epsilon(0.05));
    CHECK(r.spectrum[2] == 0.0);
}

TEST_CASE("one replica and eight merged replicas agree") {
    const SimParams p = linear_params(4, 0.1);
    StationaryOptions o = fast_options();
    const StationaryResult one = stationary_run(p, 200.0, 1, o);
    o.job_offset = 10;
    const StationaryResult eight = stationary_run(p, 200.0, 8, o);
    const double diff = std::abs(one.report.enstrophy.mean - eight.report.enstrophy.mean);
    CHECK(diff <= std::hypot(one.report.enstrophy.half_width, eight.report.enstrophy.half_width));
    CHECK(eight.report.enstrophy.half_width < one.report.enstrophy.half_width);
}

TEST_CASE("results do not depend on the worker count") {
    SimParams p = linear_params(6, 0.05);
    p.nonlinear = true;
    const StationaryResult a = stationary_run(p, 100.0, 3, fast_options(1));
    const StationaryResult b = stationary_run(p, 100.0, 3, fast_options(3));
    CHECK(same(a.report.enstrophy, b.report.enstrophy));
    CHECK(same(a.report.l4, b.report.l4));
    CHECK(a.spectrum == b.spectrum);
}

TEST_CASE("stationary run preconditions and blow-up handling") {
    const SimParams p = linear_params(4, 0.1);
    CHECK_THROWS(stationary_run(p, 99.0, 1, fast_options()));
    CHECK_THROWS(stationary_run(p, 200.0, 0, fast_options()));

    SimParams wild = p;
    wild.nonlinear = true;
    wild.nu = 0.0;
    wild.h = 0.5;
    wild.trunc = TruncationSpec(8);
    wild.noise = NoiseSpec(wild.trunc);
    wild.noise.add({1, 0}, 100.0);
    wild.noise.add({1, 1}, 100.0);
    StationaryOptions o = fast_options();
    o.observe_every = 1;
    const StationaryResult r = stationary_run(wild, 2000.0, 2, o);
    CHECK_FALSE(r.valid);
    CHECK(r.invalid_reason.find("blew up") != std::string::npos);
}

TEST_CASE("ensemble snapshot of the linear system") {
    const SimParams p = linear_params(4, 0.1);
    StationaryOptions o = fast_options();
    const Estimate e = ensemble_snapshot(p, 15.0, 64, o);
    CHECK(e.batches == 64);
    CHECK(std::abs(e.mean - 170.0 / 33.0) <= 3.0 * e.std_error);
}

TEST_CASE("sweep configuration checks") {
    SweepConfig cfg = linear_sweep();
    CHECK_NOTHROW(cfg.validate());
    cfg.nu_ladder = {0.1, 0.05};
    CHECK_THROWS(cfg.validate());
    cfg.nu_ladder = {0.1, 0.1, 0.05};
    CHECK_THROWS(cfg.validate());
    cfg.nu_ladder = {0.1, 0.05, -0.01};
    CHECK_THROWS(cfg.validate());
    cfg = linear_sweep();
    cfg.replicas = 3;
    CHECK_THROWS(cfg.validate());
    cfg = linear_sweep();
    cfg.total_time = 50.0;
    CHECK_THROWS(viscosity_sweep(cfg));
}

TEST_CASE("linear sweep: nu-term follows Q - gamma sum q |k|^2 / (nu |k|^2 + gamma)") {
    const SweepConfig cfg = linear_sweep();
    const SweepReport r = viscosity_sweep(cfg);
    REQUIRE(r.rows.size() == 3);
    REQUIRE(r.euler.has_value());
    CHECK(r.noise_hash == cfg.base.noise.hash());
    CHECK(r.q_total == 6.0);
    for (const auto& row : r.rows) {
        CHECK(row.valid);
        const double exact = 6.0 - ou_stationary_moments(cfg.base.noise, row.nu, 1.0).enstrophy;
        CHECK(std::abs(row.balance.nu_term.mean - exact) <= 3.0 * row.balance.nu_term.std_error + 1e-12);
    }
    CHECK(r.euler->balance.nu_term.mean == 0.0);
    CHECK(r.anomalous_dissipation_vanishes.holds);
    CHECK(r.anomalous_dissipation_vanishes.evidence.find("<=") != std::string::npos);
    CHECK(r.mean_enstrophy_converges.holds);
    CHECK(r.energy_dissipation_vanishes.holds);

    // verdicts are recomputable from the rows alone
    SweepReport copy = r;
    copy.anomalous_dissipation_vanishes = {};
    copy.mean_enstrophy_converges = {};
    evaluate_verdicts(copy);
    CHECK(copy.anomalous_dissipation_vanishes.holds == r.anomalous_dissipation_vanishes.holds);
    CHECK(copy.mean_enstrophy_converges.evidence == r.mean_enstrophy_converges.evidence);

    const ComparisonReport c = inviscid_comparison(r);
    REQUIRE(c.rows.size() == 3);

    const std::string spectra = spectra_csv(r);
    CHECK(spectra.substr(0, spectra.find('\n')) == "|k|,E_nu1,E_nu2,E_nu3,E_euler");
    const std::string csv = sweep_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(verdict_text(r, c).find("anomalous_dissipation_vanishes: true") != std::string::npos);
}

TEST_CASE("sweeps are deterministic") {
    SweepConfig cfg = linear_sweep();
    cfg.base.nonlinear = true;
    cfg.base.trunc = TruncationSpec(6);
    cfg.base.noise = NoiseSpec::default_forcing(cfg.base.trunc);
    cfg.total_time = 100.0;
    const SweepReport a = viscosity_sweep(cfg);
    cfg.options.workers = 1;
    const SweepReport b = viscosity_sweep(cfg);
    CHECK(sweep_csv(a) == sweep_csv(b));
    CHECK(spectra_csv(a) == spectra_csv(b));
}

TEST_CASE("comparison of identical rows gives zero distances") {
    SweepReport r = viscosity_sweep(linear_sweep());
    for (auto& row : r.rows) {
        row.balance = r.euler->balance;
        row.spectrum = r.euler->spectrum;
    }
    const ComparisonReport c = inviscid_comparison(r);
    for (const auto& row : c.rows) {
        CHECK(row.enstrophy_distance == 0.0);
        CHECK(row.energy_distance == 0.0);
        CHECK(row.spectrum_l1 == 0.0);
    }
    r.euler.reset();
    CHECK_THROWS(inviscid_comparison(r));
    SweepReport short_report;
    short_report.rows.resize(2);
    CHECK_THROWS(evaluate_verdicts(short_report));
}
