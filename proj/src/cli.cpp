#include "sdns/config.hpp"
#include "sdns/diagnostics.hpp"
#include "sdns/experiments.hpp"
#include "sdns/noise.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>

#ifndef SDNS_VERSION
#define SDNS_VERSION "unknown"
#endif

namespace sdns {

const char* code_version() { return SDNS_VERSION; }

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kBlowUp = 2;

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw OutputError("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw OutputError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::string& extra = {}) {
    std::ostringstream os;
    os << "# sdns run manifest\n"
       << "# code_version = " << code_version() << '\n'
       << "# command = " << mode_name(cfg.mode) << '\n'
       << extra << emit_config(cfg);
    write_file(dir / "manifest.txt", os.str());
}

int run_simulate(const RunConfig& cfg, const std::string& resume, std::ostream& out, std::ostream& err) {
    const SimParams params = cfg.sim_params();
    const fs::path dir = cfg.output_dir;
    const std::uint64_t steps =
        cfg.steps > 0 ? cfg.steps : static_cast<std::uint64_t>(std::llround(cfg.total_time / cfg.h));
    const double t_end = static_cast<double>(steps) * cfg.h;

    State state = State::initial(params, 0);
    std::string extra;
    if (!resume.empty()) {
        const std::string blob = read_file(resume);
        auto [restored, restored_params] =
            restore(std::as_bytes(std::span(blob.data(), blob.size())), params.trunc);
        if (!(restored_params == params)) throw CheckpointError("checkpoint parameters differ from the configuration");
        if (restored.step_count > steps) throw CheckpointError("checkpoint lies beyond the requested step count");
        state = std::move(restored);
        extra = "# resumed_from = " + resume + " at step " + std::to_string(state.step_count) + '\n';
    }
    write_manifest(dir, cfg, extra);

    const StationaryOptions opts = cfg.stationary_options();
    const double burn_in = opts.resolved_burn_in(params);
    RunningStats stats =
        RunningStats::for_run(burn_in, t_end, cfg.h * static_cast<double>(cfg.observe_every), cfg.n_batches);
    std::ofstream series(dir / "timeseries.csv", std::ios::binary);
    if (!series) throw OutputError("cannot write timeseries.csv");
    series << kTimeseriesHeader << '\n';

    Integrator integrator(params);
    try {
        state = integrator.integrate(std::move(state), t_end, [&](const State& s) {
            const Observables obs = observables(s.xi, s.t);
            series << timeseries_row(obs) << '\n';
            stats.update(obs);
        }, cfg.observe_every);
    } catch (const BlowUpError& e) {
        series.flush();
        err << "numerical blow-up at t = " << format_double(e.time()) << '\n';
        for (const auto& [t, norm] : e.history()) err << "  t = " << format_double(t) << "  ||xi|| = " << norm << '\n';
        return kBlowUp;
    }
    series.close();

    std::ostringstream balance;
    balance << balance_csv_header() << '\n';
    if (stats.batch_count() >= kMinBatches) {
        const BalanceReport r = balance_report(stats, params);
        balance << balance_csv_row(r) << '\n';
        out << "nu <||grad xi||^2> + gamma <||xi||^2> = " << format_double(r.nu_term.mean + r.gamma_term.mean)
            << " (Q = " << format_double(r.q_total) << "), residual " << format_double(r.residual_enstrophy.mean)
            << " +- " << format_double(r.residual_enstrophy.half_width) << '\n';
    } else {
        err << "warning: only " << stats.batch_count() << " complete batches, no balance estimate\n";
    }
    write_file(dir / "balance.csv", balance.str());
    const auto blob = checkpoint(state, params);
    write_file(dir / "checkpoint.bin", std::string_view(reinterpret_cast<const char*>(blob.data()), blob.size()));
    if (integrator.timestep_warnings() > 0) {
        err << "warning: h exceeded the advective/diffusive bound at " << integrator.timestep_warnings()
            << " speed samples (max speed " << format_double(integrator.max_speed_seen()) << ")\n";
    }
    out << "simulated " << state.step_count << " steps to t = " << format_double(state.t) << '\n';
    return kOk;
}

int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const fs::path dir = cfg.output_dir;
    write_manifest(dir, cfg);
    const SweepReport report = viscosity_sweep(cfg.sweep_config());
    std::optional<ComparisonReport> comparison;
    if (report.euler) comparison = inviscid_comparison(report);
    write_file(dir / "sweep.csv", sweep_csv(report));
    write_file(dir / "spectra.csv", spectra_csv(report));
    const std::string verdict = verdict_text(report, comparison);
    write_file(dir / "verdict.txt", verdict);
    out << verdict;

    bool blew_up = false;
    auto check = [&](const SweepRow& r) {
        if (r.valid) return;
        err << "row nu = " << format_double(r.nu) << " invalid: " << r.note << '\n';
        blew_up = blew_up || r.note.find("blew up") != std::string::npos;
    };
    for (const auto& r : report.rows) check(r);
    if (report.euler) check(*report.euler);
    return blew_up ? kBlowUp : kOk;
}

int run_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const SimParams params = cfg.sim_params();
    const fs::path dir = cfg.output_dir;
    write_manifest(dir, cfg);
    const StationaryOptions opts = cfg.stationary_options();
    const StationaryResult r = stationary_run(params, cfg.total_time, cfg.resolved_replicas(), opts);

    std::ostringstream spec;
    spec << "|k|,E\n";
    for (std::size_t b = 0; b < r.spectrum.size(); ++b) spec << b << ',' << format_double(r.spectrum[b]) << '\n';
    write_file(dir / "spectrum.csv", spec.str());
    if (r.report.batches > 0) {
        write_file(dir / "balance.csv", balance_csv_header() + "\n" + balance_csv_row(r.report) + "\n");
    }
    if (!r.valid) {
        err << "stationary run invalid: " << r.invalid_reason << '\n';
        return r.invalid_reason.find("blew up") != std::string::npos ? kBlowUp : kInvalid;
    }
    out << "enstrophy spectrum over " << r.replicas_completed << " replicas written to " << (dir / "spectrum.csv").string()
        << '\n';
    return kOk;
}

int run_check_noise(const RunConfig& cfg, std::ostream& out) {
    const SimParams params = cfg.sim_params();
    const HMReport report = check_hm_condition(params.noise);
    out << report.summary() << '\n'
        << "Q = " << format_double(total_q(params.noise)) << ", Q_u = " << format_double(total_q_velocity(params.noise))
        << '\n';
    return report.pass ? kOk : kInvalid;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pseudo-spectral simulator for the stochastically forced, damped 2-D Navier-Stokes equations", "sdns"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string resume;
    std::vector<std::pair<std::string, std::string>> overrides;
    auto override_option = [&](const char* flag, const char* key, const char* help) {
        app.add_option_function<std::string>(flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
                                             help);
    };
    app.add_option("--config", config_path, "Configuration file (flat key = value)");
    override_option("--seed", "seed", "Master seed (unsigned 64-bit)");
    override_option("--output-dir", "output_dir", "Directory for outputs and the run manifest");
    override_option("--nu", "nu", "Viscosity override");
    override_option("--gamma", "gamma", "Damping override");
    override_option("--steps", "steps", "Number of timesteps (simulate)");
    override_option("--grid", "N", "Collocation grid size N (power of two >= 2K + 2)");
    app.add_option("--resume", resume, "Continue a simulate run from a checkpoint file");

    for (Mode m : {Mode::simulate, Mode::sweep, Mode::check_noise, Mode::spectrum}) {
        app.add_subcommand(mode_name(m))->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalid;
    }
    const Mode mode = *parse_mode(app.get_subcommands().front()->get_name());

    try {
        const std::string text = config_path.empty() ? std::string{} : read_file(config_path);
        const RunConfig cfg = parse_config(text, mode, overrides);
        if (mode == Mode::check_noise) return run_check_noise(cfg, out);
        fs::create_directories(cfg.output_dir);
        switch (mode) {
            case Mode::simulate: return run_simulate(cfg, resume, out, err);
            case Mode::sweep: return run_sweep(cfg, out, err);
            case Mode::spectrum: return run_spectrum(cfg, out, err);
            case Mode::check_noise: break;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
    } catch (const CheckpointError& e) {
        err << "checkpoint error: " << e.what() << '\n';
    } catch (const OutputError& e) {
        err << "i/o error: " << e.what() << '\n';
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
    }
    return kInvalid;
}

}  // namespace sdns
