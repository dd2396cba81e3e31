#pragma once

#include "sdns/noise.hpp"
#include "sdns/rng.hpp"
#include "sdns/spectral.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sdns {

struct SimParams {
    double nu = 0.0;     ///< kinematic viscosity, >= 0
    double gamma = 1.0;  ///< linear damping, > 0
    double h = 5e-3;     ///< timestep
    TruncationSpec trunc{32};
    NoiseSpec noise{TruncationSpec{32}};
    bool nonlinear = true;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on gamma <= 0, nu < 0, h <= 0, or a
    /// noise spec built for a different truncation.
    void validate() const;

    friend bool operator==(const SimParams&, const SimParams&) = default;
};

/// Advective/diffusive timestep bound min(0.1/gamma, 0.25/(K u_max), 0.5/(nu K_eff^2)),
/// with K_eff the dealiasing cutoff. The exponential treatment of the linear
/// part makes this a accuracy guide rather than a hard stability limit.
double timestep_limit(const SimParams& params, double max_speed);

/// Largest grid speed |u(x_j)| of the velocity induced by xi.
double max_grid_speed(const SpectralField& xi);

struct State {
    SpectralField xi;
    double t = 0.0;
    RngState rng;
    std::uint64_t step_count = 0;

    /// xi = 0 at t = 0 with the RNG stream of trajectory `job`.
    static State initial(const SimParams& params, std::uint64_t job);

    friend bool operator==(const State&, const State&) = default;
};

/// A trajectory left the finite range; carries the last enstrophy samples.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(double t, std::vector<std::pair<double, double>> history);

    double time() const { return time_; }
    /// (t, ||xi||_{H^0}) for the most recent steps, oldest first.
    const std::vector<std::pair<double, double>>& history() const { return history_; }

private:
    double time_;
    std::vector<std::pair<double, double>> history_;
};

using Observer = std::function<void(const State&)>;

/// Exponential Euler-Maruyama stepper.
///
/// Per mode, with lambda_k = nu |k|^2 + gamma:
///   xi_k <- exp(-lambda_k h) (xi_k - h N_k(xi)) + eta_k,
///   E|eta_k|^2 = q_k |k|^2 (1 - exp(-2 lambda_k h)) / lambda_k.
/// With the nonlinearity off this is the exact OU transition.
class Integrator {
public:
    explicit Integrator(SimParams params);

    const SimParams& params() const { return params_; }

    void step(State& state);

    /// Steps until t_end (rounded to a whole number of steps), calling
    /// `observer` after every `observe_every`-th step.
    State integrate(State state, double t_end, const Observer& observer = {}, std::uint64_t observe_every = 1);

    /// Running maximum of the sampled grid speed (refreshed every 100 steps).
    double max_speed_seen() const { return max_speed_; }
    /// Number of speed samples at which h exceeded timestep_limit().
    std::uint64_t timestep_warnings() const { return warnings_; }

private:
    void record(double t, double norm);

    SimParams params_;
    std::vector<double> decay_;
    struct ForcedMode {
        std::size_t index;
        std::size_t mirror;
        double amplitude;  ///< sqrt(q |k|^2 (1 - exp(-2 lambda h)) / (2 lambda))
    };
    std::vector<ForcedMode> forced_;
    std::vector<std::pair<double, double>> history_;
    std::size_t history_head_ = 0;
    double max_speed_ = 0.0;
    std::uint64_t warnings_ = 0;
};

State step(State state, const SimParams& params);
State integrate(State state, const SimParams& params, double t_end, const Observer& observer = {},
                std::uint64_t observe_every = 1);

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Versioned little-endian snapshot of (State, SimParams) with a trailing
/// FNV-1a 64-bit checksum.
std::vector<std::byte> checkpoint(const State& state, const SimParams& params);
std::pair<State, SimParams> restore(std::span<const std::byte> blob);
/// As restore(blob), but throws CheckpointError unless the blob's truncation equals `expected`.
std::pair<State, SimParams> restore(std::span<const std::byte> blob, const TruncationSpec& expected);

}  // namespace sdns
