#include "sdns/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sdns {

double StationaryOptions::resolved_burn_in(const SimParams& params) const {
    return burn_in > 0.0 ? burn_in : 10.0 / params.gamma;
}

void parallel_jobs(std::size_t n_jobs, unsigned workers, const std::function<void(std::size_t)>& job) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_jobs));
    std::vector<std::exception_ptr> errors(n_jobs);
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next++; i < n_jobs; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        drain();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(drain);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ReplicaResult run_replica(const SimParams& params, double total_time, std::uint64_t job,
                          const StationaryOptions& options) {
    const double burn_in = options.resolved_burn_in(params);
    const double interval = params.h * static_cast<double>(options.observe_every);
    ReplicaResult r;
    r.job = job;
    r.stats = RunningStats::for_run(burn_in, total_time, interval, options.n_batches, job);
    r.spectrum = SpectrumAverage(burn_in);

    Integrator integrator(params);
    try {
        integrator.integrate(State::initial(params, job), total_time, [&](const State& s) {
            if (s.t < burn_in) return;
            r.stats.update(observables(s.xi, s.t));
            r.spectrum.add(s.xi, s.t);
        }, options.observe_every);
    } catch (const BlowUpError& e) {
        r.blew_up = true;
        r.blow_up_time = e.time();
        r.error = e.what();
    }
    r.max_speed = integrator.max_speed_seen();
    r.timestep_warnings = integrator.timestep_warnings();
    return r;
}

namespace {

bool halves_drift(const RunningStats& stats) {
    const auto [first, second] = stats.halves(Quantity::enstrophy);
    if (!first.available() || !second.available()) return false;
    return std::abs(first.mean - second.mean) > 2.0 * std::hypot(first.std_error, second.std_error);
}

}  // namespace

StationaryResult combine_replicas(const SimParams& params, std::vector<ReplicaResult> replicas, double burn_in) {
    std::sort(replicas.begin(), replicas.end(), [](const auto& a, const auto& b) { return a.job < b.job; });
    StationaryResult out;
    out.replicas = replicas.size();
    out.burn_in = burn_in;
    std::optional<RunningStats> merged;
    SpectrumAverage spectrum(burn_in);
    for (const auto& r : replicas) {
        out.max_speed = std::max(out.max_speed, r.max_speed);
        out.timestep_warnings += r.timestep_warnings;
        if (r.blew_up) {
            out.valid = false;
            if (!out.invalid_reason.empty()) out.invalid_reason += "; ";
            out.invalid_reason += "replica " + std::to_string(r.job) + " blew up at t = " + format_double(r.blow_up_time);
            continue;
        }
        ++out.replicas_completed;
        merged = merged ? merge(*merged, r.stats) : r.stats;
        spectrum.merge(r.spectrum);
    }
    if (!merged) {
        out.valid = false;
        return out;
    }
    if (halves_drift(*merged)) {
        out.burn_in = 2.0 * burn_in;
        out.burn_in_extended = true;
        merged->discard_before(out.burn_in);
    }
    out.spectrum = spectrum.mean();
    try {
        out.report = balance_report(*merged, params);
    } catch (const InsufficientBatches& e) {
        out.valid = false;
        if (!out.invalid_reason.empty()) out.invalid_reason += "; ";
        out.invalid_reason += e.what();
        out.report.nu = params.nu;
        out.report.gamma = params.gamma;
        out.report.q_total = total_q(params.noise);
        out.report.q_velocity = total_q_velocity(params.noise);
    }
    out.stats = std::move(*merged);
    return out;
}

StationaryResult stationary_run(const SimParams& params, double total_time, std::size_t replicas,
                                const StationaryOptions& options) {
    params.validate();
    const double burn_in = options.resolved_burn_in(params);
    if (total_time < 20.0 * burn_in) throw std::invalid_argument("stationary run: total_time must be >= 20 burn-in");
    if (replicas == 0) throw std::invalid_argument("stationary run: replicas must be >= 1");
    if (options.observe_every == 0) throw std::invalid_argument("stationary run: observe_every must be >= 1");

    std::vector<ReplicaResult> results(replicas);
    parallel_jobs(replicas, options.workers, [&](std::size_t i) {
        results[i] = run_replica(params, total_time, options.job_offset + i, options);
    });
    return combine_replicas(params, std::move(results), burn_in);
}

Estimate ensemble_snapshot(const SimParams& params, double time, std::size_t replicas,
                           const StationaryOptions& options) {
    params.validate();
    std::vector<double> values(replicas);
    parallel_jobs(replicas, options.workers, [&](std::size_t i) {
        const State s = integrate(State::initial(params, options.job_offset + i), params, time);
        values[i] = observables(s.xi, s.t).enstrophy;
    });
    return batch_means(values);
}

// ---------------------------------------------------------------------------
// Viscosity sweep

void SweepConfig::validate() const {
    base.validate();
    if (nu_ladder.size() < 3) throw std::invalid_argument("sweep: ladder needs at least 3 points for a trend verdict");
    for (std::size_t i = 0; i < nu_ladder.size(); ++i) {
        if (!(nu_ladder[i] > 0.0) || !std::isfinite(nu_ladder[i])) {
            throw std::invalid_argument("sweep: ladder viscosities must be positive");
        }
        if (i > 0 && !(nu_ladder[i] < nu_ladder[i - 1])) {
            throw std::invalid_argument("sweep: ladder must be strictly decreasing");
        }
    }
    if (replicas < 4) throw std::invalid_argument("sweep: replicas must be >= 4");
    if (!(dissipation_threshold > 0.0)) throw std::invalid_argument("sweep: dissipation threshold must be > 0");
    if (!(convergence_tolerance > 0.0)) throw std::invalid_argument("sweep: convergence tolerance must be > 0");
}

namespace {

std::string pm(const Estimate& e) { return format_double(e.mean) + " +- " + format_double(e.half_width); }

double joint_hw(const Estimate& a, const Estimate& b) { return std::hypot(a.half_width, b.half_width); }

// Each term may exceed its predecessor by at most their joint CI half-width.
bool decreasing_chain(const std::vector<SweepRow>& rows, Estimate BalanceReport::*term, std::ostringstream& ev) {
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Estimate& e = rows[i].balance.*term;
        ev << "  nu = " << format_double(rows[i].nu) << ": " << pm(e) << '\n';
        if (!rows[i].valid || !e.available()) {
            ok = false;
            ev << "    row invalid\n";
            continue;
        }
        if (i == 0) continue;
        const Estimate& prev = rows[i - 1].balance.*term;
        const double slack = joint_hw(prev, e);
        const bool step = e.mean <= prev.mean + slack;
        ev << "    " << format_double(e.mean) << (step ? " <= " : " > ") << format_double(prev.mean) << " + "
           << format_double(slack) << '\n';
        ok = ok && step;
    }
    const Estimate& first = rows.front().balance.*term;
    const Estimate& last = rows.back().balance.*term;
    const bool overall = last.mean < first.mean;
    ev << "  overall: " << format_double(last.mean) << (overall ? " < " : " >= ") << format_double(first.mean) << '\n';
    return ok && overall;
}

bool within(const Estimate& e, double target, double tol, std::ostringstream& ev, const char* label) {
    const double rel = std::abs(e.mean - target) / target;
    const bool ok = e.available() && rel <= tol;
    ev << "  " << label << ": |" << format_double(e.mean) << " - " << format_double(target) << "| / "
       << format_double(target) << " = " << format_double(rel) << (ok ? " <= " : " > ") << format_double(tol) << '\n';
    return ok;
}

bool agree(const Estimate& a, const Estimate& b, std::ostringstream& ev) {
    const double diff = std::abs(a.mean - b.mean);
    const double slack = joint_hw(a, b);
    const bool ok = a.available() && b.available() && diff <= slack;
    ev << "  |" << format_double(a.mean) << " - " << format_double(b.mean) << "| = " << format_double(diff)
       << (ok ? " <= " : " > ") << "joint CI " << format_double(slack) << '\n';
    return ok;
}

SimParams row_params(const SweepConfig& cfg, double nu) {
    SimParams p = cfg.base;
    p.nu = nu;
    return p;
}

}  // namespace

void evaluate_verdicts(SweepReport& report) {
    const auto& rows = report.rows;
    if (rows.size() < 3) throw std::invalid_argument("sweep: ladder needs at least 3 points for a trend verdict");
    const double q = report.q_total;
    const double qu = report.q_velocity;

    {
        std::ostringstream ev;
        ev << "nu <||grad xi||^2> along the ladder (decreasing within joint CIs):\n";
        const bool chain = decreasing_chain(rows, &BalanceReport::nu_term, ev);
        const double limit = report.dissipation_threshold * q;
        const double last = rows.back().balance.nu_term.mean;
        const bool small = last <= limit;
        ev << "  final: " << format_double(last) << (small ? " <= " : " > ") << format_double(report.dissipation_threshold)
           << " Q = " << format_double(limit) << '\n';
        report.anomalous_dissipation_vanishes = {chain && small, ev.str()};
    }
    {
        std::ostringstream ev;
        ev << "nu <||grad u||^2> = nu <||xi||^2> along the ladder (decreasing within joint CIs):\n";
        const bool chain = decreasing_chain(rows, &BalanceReport::nu_energy_term, ev);
        const bool near = within(rows.back().balance.gamma_energy_term, qu, report.convergence_tolerance, ev,
                                 "gamma <||u||^2> at smallest nu vs Q_u");
        report.energy_dissipation_vanishes = {chain && near, ev.str()};
    }

    if (!report.euler) {
        report.mean_enstrophy_converges = {false, "no nu = 0 row\n"};
        report.mean_energy_converges = {false, "no nu = 0 row\n"};
        return;
    }
    const auto& small = rows.back();
    const auto& euler = *report.euler;
    {
        std::ostringstream ev;
        ev << "gamma <||xi||^2> at nu = " << format_double(small.nu) << " vs nu = 0:\n";
        const bool valid = small.valid && euler.valid;
        if (!valid) ev << "  a row is invalid\n";
        const bool same = agree(small.balance.gamma_term, euler.balance.gamma_term, ev);
        const bool a = within(small.balance.gamma_term, q, report.convergence_tolerance, ev, "smallest nu vs Q");
        const bool b = within(euler.balance.gamma_term, q, report.convergence_tolerance, ev, "nu = 0 vs Q");
        report.mean_enstrophy_converges = {valid && same && a && b, ev.str()};
    }
    {
        std::ostringstream ev;
        ev << "gamma <||u||^2> at nu = " << format_double(small.nu) << " vs nu = 0:\n";
        const bool valid = small.valid && euler.valid;
        if (!valid) ev << "  a row is invalid\n";
        const bool same = agree(small.balance.gamma_energy_term, euler.balance.gamma_energy_term, ev);
        const bool a = within(small.balance.gamma_energy_term, qu, report.convergence_tolerance, ev, "smallest nu vs Q_u");
        const bool b = within(euler.balance.gamma_energy_term, qu, report.convergence_tolerance, ev, "nu = 0 vs Q_u");
        report.mean_energy_converges = {valid && same && a && b, ev.str()};
    }
}

SweepReport viscosity_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const StationaryOptions& opts = cfg.options;
    const double burn_in = opts.resolved_burn_in(cfg.base);
    if (cfg.total_time < 20.0 * burn_in) throw std::invalid_argument("sweep: total_time must be >= 20 burn-in");

    std::vector<double> nus = cfg.nu_ladder;
    if (cfg.include_euler) nus.push_back(0.0);

    SweepReport report;
    report.noise_hash = cfg.base.noise.hash();
    report.q_total = total_q(cfg.base.noise);
    report.q_velocity = total_q_velocity(cfg.base.noise);
    report.dissipation_threshold = cfg.dissipation_threshold;
    report.convergence_tolerance = cfg.convergence_tolerance;

    std::vector<SimParams> params;
    for (double nu : nus) {
        params.push_back(row_params(cfg, nu));
        if (params.back().noise.hash() != report.noise_hash) throw std::logic_error("sweep: forcing differs between rows");
    }

    // Flat (row, replica) job list; stream ids are fixed by position, not by completion order.
    const std::size_t n_jobs = nus.size() * cfg.replicas;
    std::vector<ReplicaResult> results(n_jobs);
    parallel_jobs(n_jobs, opts.workers, [&](std::size_t j) {
        results[j] = run_replica(params[j / cfg.replicas], cfg.total_time, opts.job_offset + j, opts);
    });

    for (std::size_t i = 0; i < nus.size(); ++i) {
        std::vector<ReplicaResult> row_results(std::make_move_iterator(results.begin() + i * cfg.replicas),
                                               std::make_move_iterator(results.begin() + (i + 1) * cfg.replicas));
        StationaryResult s = combine_replicas(params[i], std::move(row_results), burn_in);
        SweepRow row;
        row.nu = nus[i];
        row.balance = s.report;
        row.spectrum = std::move(s.spectrum);
        row.valid = s.valid;
        row.note = s.invalid_reason;
        row.burn_in = s.burn_in;
        row.burn_in_extended = s.burn_in_extended;
        row.timestep_warnings = s.timestep_warnings;
        if (cfg.include_euler && i + 1 == nus.size()) {
            report.euler = std::move(row);
        } else {
            report.rows.push_back(std::move(row));
        }
    }
    evaluate_verdicts(report);
    return report;
}

ComparisonReport inviscid_comparison(const SweepReport& sweep) {
    if (!sweep.euler) throw std::invalid_argument("inviscid comparison: sweep has no nu = 0 row");
    const SweepRow& euler = *sweep.euler;
    ComparisonReport out;
    for (const auto& row : sweep.rows) {
        ComparisonRow c;
        c.nu = row.nu;
        c.enstrophy_distance = std::abs(row.balance.enstrophy.mean - euler.balance.enstrophy.mean);
        c.enstrophy_joint_hw = joint_hw(row.balance.enstrophy, euler.balance.enstrophy);
        c.energy_distance = std::abs(row.balance.energy.mean - euler.balance.energy.mean);
        c.energy_joint_hw = joint_hw(row.balance.energy, euler.balance.energy);
        const std::size_t bins = std::max(row.spectrum.size(), euler.spectrum.size());
        for (std::size_t b = 0; b < bins; ++b) {
            const double x = b < row.spectrum.size() ? row.spectrum[b] : 0.0;
            const double y = b < euler.spectrum.size() ? euler.spectrum[b] : 0.0;
            c.spectrum_l1 += std::abs(x - y);
        }
        out.rows.push_back(c);
    }
    auto decreasing = [&](double ComparisonRow::*m) {
        for (std::size_t i = 1; i < out.rows.size(); ++i)
            if (out.rows[i].*m > out.rows[i - 1].*m) return false;
        return true;
    };
    out.enstrophy_decreasing = decreasing(&ComparisonRow::enstrophy_distance);
    out.energy_decreasing = decreasing(&ComparisonRow::energy_distance);
    out.spectrum_decreasing = decreasing(&ComparisonRow::spectrum_l1);
    return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string sweep_csv(const SweepReport& report) {
    std::ostringstream os;
    os << "row,valid,burn_in,burn_in_extended,timestep_warnings," << balance_csv_header() << '\n';
    auto emit = [&](const std::string& label, const SweepRow& r) {
        os << label << ',' << (r.valid ? 1 : 0) << ',' << format_double(r.burn_in) << ',' << (r.burn_in_extended ? 1 : 0)
           << ',' << r.timestep_warnings << ',' << balance_csv_row(r.balance) << '\n';
    };
    for (std::size_t i = 0; i < report.rows.size(); ++i) emit("nu" + std::to_string(i + 1), report.rows[i]);
    if (report.euler) emit("euler", *report.euler);
    return os.str();
}

std::string spectra_csv(const SweepReport& report) {
    std::ostringstream os;
    os << "|k|";
    std::vector<const std::vector<double>*> cols;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        os << ",E_nu" << (i + 1);
        cols.push_back(&report.rows[i].spectrum);
    }
    if (report.euler) {
        os << ",E_euler";
        cols.push_back(&report.euler->spectrum);
    }
    os << '\n';
    std::size_t bins = 0;
    for (const auto* c : cols) bins = std::max(bins, c->size());
    for (std::size_t b = 0; b < bins; ++b) {
        os << b;
        for (const auto* c : cols) os << ',' << format_double(b < c->size() ? (*c)[b] : 0.0);
        os << '\n';
    }
    return os.str();
}

std::string verdict_text(const SweepReport& report, const std::optional<ComparisonReport>& comparison) {
    std::ostringstream os;
    os << "Q = " << format_double(report.q_total) << ", Q_u = " << format_double(report.q_velocity)
       << ", noise hash = " << report.noise_hash << '\n';
    os << "dissipation threshold = " << format_double(report.dissipation_threshold)
       << " Q, convergence tolerance = " << format_double(report.convergence_tolerance) << "\n\n";
    auto block = [&](const char* name, const Verdict& v) {
        os << name << ": " << (v.holds ? "true" : "false") << '\n' << v.evidence << '\n';
    };
    block("anomalous_dissipation_vanishes", report.anomalous_dissipation_vanishes);
    block("mean_enstrophy_converges", report.mean_enstrophy_converges);
    block("energy_dissipation_vanishes", report.energy_dissipation_vanishes);
    block("mean_energy_converges", report.mean_energy_converges);
    auto notes = [&](const std::string& label, const SweepRow& r) {
        if (!r.valid) os << "row " << label << " invalid: " << r.note << '\n';
        if (r.burn_in_extended) os << "row " << label << ": burn-in extended to " << format_double(r.burn_in) << '\n';
        if (!r.balance.l4_stable) os << "row " << label << ": L4 moment not stable between halves\n";
    };
    for (const auto& r : report.rows) notes("nu = " + format_double(r.nu), r);
    if (report.euler) notes("nu = 0", *report.euler);
    if (comparison) {
        os << "\ndistance to nu = 0 (enstrophy, energy, spectrum L1):\n";
        for (const auto& c : comparison->rows) {
            os << "  nu = " << format_double(c.nu) << ": " << format_double(c.enstrophy_distance) << " +- "
               << format_double(c.enstrophy_joint_hw) << ", " << format_double(c.energy_distance) << " +- "
               << format_double(c.energy_joint_hw) << ", " << format_double(c.spectrum_l1) << '\n';
        }
        os << "  decreasing: enstrophy " << (comparison->enstrophy_decreasing ? "yes" : "no") << ", energy "
           << (comparison->energy_decreasing ? "yes" : "no") << ", spectrum "
           << (comparison->spectrum_decreasing ? "yes" : "no") << '\n';
    }
    return os.str();
}

}  // namespace sdns
