#pragma once

#include "sdns/experiments.hpp"
#include "sdns/integrator.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace sdns {

enum class Mode { simulate, sweep, check_noise, spectrum };

const char* mode_name(Mode m);
std::optional<Mode> parse_mode(std::string_view name);

/// Everything a run needs, resolved and validated.
struct RunConfig {
    Mode mode = Mode::simulate;

    std::optional<double> nu;     ///< required for simulate and spectrum
    std::optional<double> gamma;  ///< required for simulate and spectrum; sweep defaults to 1
    int K = 32;
    int N = 0;  ///< 0 selects the smallest power of two >= 2K + 2
    double h = 5e-3;
    std::uint64_t seed = 1;
    bool nonlinear = true;
    /// (k1, k2, q) in the half-lattice; empty selects the default forcing.
    std::vector<std::tuple<int, int, double>> forcing;

    std::uint64_t steps = 0;  ///< simulate: 0 derives the step count from total_time
    double total_time = 1000.0;
    double burn_in = 0.0;  ///< <= 0 selects 10/gamma
    std::uint64_t replicas = 0;  ///< 0 selects 4 for sweep and 1 otherwise
    std::uint64_t n_batches = 30;
    std::uint64_t observe_every = 20;
    unsigned workers = 0;

    std::vector<double> nu_ladder{0.1, 0.05, 0.02, 0.01, 0.005};
    bool include_euler = true;
    double dissipation_threshold = 0.1;
    double convergence_tolerance = 0.1;

    std::string output_dir = "out";

    std::uint64_t resolved_replicas() const;
    SimParams sim_params() const;
    StationaryOptions stationary_options() const;
    SweepConfig sweep_config() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Validation failure; `line` is the 1-based config line, 0 when the cause
/// is not tied to a line (a missing key or a command-line override).
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

/// Flat `key = value` text with `#` comments and repeated `force k1 k2 q`
/// lines. `mode` (from the command line) takes precedence over a `mode`
/// key; `overrides` are (key, value) pairs applied after the text.
RunConfig parse_config(std::string_view text, std::optional<Mode> mode = {},
                       const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Re-parseable text listing every field, floats with 17 significant digits.
std::string emit_config(const RunConfig& cfg);

/// Command-line entry point: `sdns <simulate|sweep|check-noise|spectrum> [flags]`.
/// Returns 0 on success, 1 on a validation error, 2 on a numerical blow-up.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Version string written to run manifests.
const char* code_version();

}  // namespace sdns
