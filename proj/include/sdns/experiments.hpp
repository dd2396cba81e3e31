#pragma once

#include "sdns/diagnostics.hpp"
#include "sdns/integrator.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sdns {

struct StationaryOptions {
    double burn_in = 0.0;               ///< <= 0 selects 10/gamma
    std::size_t n_batches = 30;         ///< batches per replica
    std::uint64_t observe_every = 20;   ///< steps between observations
    std::uint64_t job_offset = 0;       ///< first RNG stream id
    unsigned workers = 0;               ///< 0 selects std::thread::hardware_concurrency()

    double resolved_burn_in(const SimParams& params) const;
};

/// Runs job(i) for i in [0, n_jobs) on a bounded pool of threads. Results
/// are the caller's responsibility to store by index; the first exception
/// (lowest job index) is rethrown after all jobs finish.
void parallel_jobs(std::size_t n_jobs, unsigned workers, const std::function<void(std::size_t)>& job);

/// Post-burn-in statistics of one trajectory started from xi = 0.
struct ReplicaResult {
    std::uint64_t job = 0;
    RunningStats stats{0.0, 1};
    SpectrumAverage spectrum;
    bool blew_up = false;
    double blow_up_time = 0.0;
    std::string error;
    double max_speed = 0.0;
    std::uint64_t timestep_warnings = 0;
};

ReplicaResult run_replica(const SimParams& params, double total_time, std::uint64_t job,
                          const StationaryOptions& options);

struct StationaryResult {
    BalanceReport report;      ///< merged over replicas; meaningful only when report.batches > 0
    RunningStats stats{0.0, 1};
    std::vector<double> spectrum;  ///< time- and replica-averaged enstrophy spectrum
    bool valid = true;
    std::string invalid_reason;
    double burn_in = 0.0;      ///< effective burn-in after any extension
    bool burn_in_extended = false;
    std::size_t replicas = 0;
    std::size_t replicas_completed = 0;
    double max_speed = 0.0;
    std::uint64_t timestep_warnings = 0;
};

/// Combines replica results (in job order) into one stationary estimate.
///
/// If the first- and second-half enstrophy means of the pooled batches differ
/// by more than two joint standard errors, the burn-in is doubled once and
/// batches that started before it are dropped. A replica that blew up marks
/// the result invalid; the remaining replicas still form a partial report.
StationaryResult combine_replicas(const SimParams& params, std::vector<ReplicaResult> replicas, double burn_in);

/// `replicas` independent trajectories of length `total_time` each (streams
/// job_offset, job_offset + 1, ...), merged. Requires total_time >= 20 burn_in.
StationaryResult stationary_run(const SimParams& params, double total_time, std::size_t replicas,
                                const StationaryOptions& options = {});

/// Enstrophy at time `time` over `replicas` independent trajectories from
/// xi = 0; the CI treats each replica as one independent sample.
Estimate ensemble_snapshot(const SimParams& params, double time, std::size_t replicas,
                           const StationaryOptions& options = {});

struct SweepConfig {
    std::vector<double> nu_ladder{0.1, 0.05, 0.02, 0.01, 0.005};
    bool include_euler = true;
    std::size_t replicas = 4;
    double total_time = 1000.0;  ///< per replica
    SimParams base;
    double dissipation_threshold = 0.1;  ///< fraction of Q the smallest-nu term must stay below
    double convergence_tolerance = 0.1;  ///< relative distance of gamma <||xi||^2> to Q
    StationaryOptions options;

    /// Throws std::invalid_argument for a non-decreasing or non-positive
    /// ladder, fewer than 3 ladder points, replicas < 4, or invalid base params.
    void validate() const;
};

struct SweepRow {
    double nu = 0.0;
    BalanceReport balance;
    std::vector<double> spectrum;
    bool valid = true;
    std::string note;
    double burn_in = 0.0;
    bool burn_in_extended = false;
    std::uint64_t timestep_warnings = 0;
};

struct Verdict {
    bool holds = false;
    /// The inequality chain with the estimates and CIs it was decided from.
    std::string evidence;
};

struct SweepReport {
    std::vector<SweepRow> rows;  ///< ladder order
    std::optional<SweepRow> euler;
    std::uint64_t noise_hash = 0;
    double q_total = 0.0;
    double q_velocity = 0.0;
    double dissipation_threshold = 0.1;
    double convergence_tolerance = 0.1;

    Verdict anomalous_dissipation_vanishes;
    Verdict mean_enstrophy_converges;
    Verdict energy_dissipation_vanishes;
    Verdict mean_energy_converges;
};

/// Evaluates all verdicts from the stored rows alone.
void evaluate_verdicts(SweepReport& report);

/// One stationary run per ladder entry (plus nu = 0 when requested), all with
/// the forcing of cfg.base. Job j of ladder position i uses RNG stream
/// job_offset + i * replicas + j; the Euler row follows the ladder.
SweepReport viscosity_sweep(const SweepConfig& cfg);

struct ComparisonRow {
    double nu = 0.0;
    double enstrophy_distance = 0.0;     ///< |<||xi||^2>_nu - <||xi||^2>_0|
    double enstrophy_joint_hw = 0.0;     ///< sqrt(hw_nu^2 + hw_0^2)
    double energy_distance = 0.0;
    double energy_joint_hw = 0.0;
    double spectrum_l1 = 0.0;            ///< sum_b |E_nu(b) - E_0(b)|
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool enstrophy_decreasing = false;
    bool energy_decreasing = false;
    bool spectrum_decreasing = false;
};

/// Distances of every ladder row to the Euler row. Throws std::invalid_argument
/// when the sweep has no Euler row.
ComparisonReport inviscid_comparison(const SweepReport& sweep);

std::string sweep_csv(const SweepReport& report);
/// `|k|,E_nu1,...,E_nuN[,E_euler]`, columns in ladder order.
std::string spectra_csv(const SweepReport& report);
std::string verdict_text(const SweepReport& report, const std::optional<ComparisonReport>& comparison = {});

}  // namespace sdns
