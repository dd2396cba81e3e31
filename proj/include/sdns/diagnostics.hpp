#pragma once

#include "sdns/integrator.hpp"
#include "sdns/spectral.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdns {

struct Observables {
    double t = 0.0;
    double energy = 0.0;            ///< ||u||^2_{H^0}
    double enstrophy = 0.0;         ///< ||xi||^2_{H^0}
    double palinstrophy = 0.0;      ///< ||grad xi||^2_{H^0}
    double l4 = 0.0;                ///< ||xi||^4_{L^4}
    double l2_weighted_grad = 0.0;  ///< || |xi| grad xi ||^2_{H^0}
};

/// Spectral sums for the H^a quantities; the L^4 functionals use a grid
/// oversampled 2x, which integrates them exactly for a band-limited field.
Observables observables(const SpectralField& xi, double t = 0.0);

enum class Quantity : std::size_t { energy, enstrophy, palinstrophy, l4, l2_weighted_grad };
inline constexpr std::size_t kQuantityCount = 5;
using QuantityArray = std::array<double, kQuantityCount>;

QuantityArray to_array(const Observables& obs);
const char* quantity_name(Quantity q);

/// Mean with a 95% Student-t confidence half-width.
struct Estimate {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double half_width = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    std::size_t batches = 0;

    bool available() const { return batches > 0; }
    double lower() const { return mean - half_width; }
    double upper() const { return mean + half_width; }
    bool covers(double x) const { return std::abs(x - mean) <= half_width; }
};

/// Minimum batch count before a confidence interval is reported.
inline constexpr std::size_t kMinBatches = 10;

/// Non-overlapping batch-means estimate over `batch_values`; unavailable
/// (batches = 0) with fewer than kMinBatches values.
Estimate batch_means(std::span<const double> batch_values);

/// Scales an estimate by a constant (exact for linear functionals of batch means).
Estimate scaled(const Estimate& e, double factor);

class InsufficientBatches : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Online post-burn-in averages in contiguous, equal-length batches.
///
/// Samples with t < burn_in are discarded. Each complete batch stores its
/// per-quantity mean; a trailing partial batch is never reported. Batches
/// are tagged with the source (replica) id so that merged statistics are
/// evaluated in a canonical order and do not depend on merge order.
class RunningStats {
public:
    struct Batch {
        std::uint64_t source = 0;
        std::uint64_t index = 0;
        double t_start = 0.0;
        QuantityArray mean{};
    };

    RunningStats(double burn_in, std::size_t batch_samples, std::uint64_t source = 0);

    /// Batches sized so that sampling every `sample_interval` over [0, t_end]
    /// yields `n_batches` post-burn-in batches.
    static RunningStats for_run(double burn_in, double t_end, double sample_interval, std::size_t n_batches,
                                std::uint64_t source = 0);

    /// Throws std::invalid_argument if obs.t does not exceed the previous sample time.
    void update(const Observables& obs);

    double burn_in() const { return burn_in_; }
    std::size_t batch_samples() const { return batch_samples_; }
    /// Post-burn-in samples accumulated so far, including the open batch.
    std::size_t count() const { return count_; }
    std::size_t batch_count() const { return batches_.size(); }
    const std::vector<Batch>& batches() const { return batches_; }

    Estimate estimate(Quantity q) const;
    /// Estimate of any linear combination, evaluated per batch.
    template <class Fn>
    Estimate estimate_of(Fn fn) const {
        std::vector<double> values;
        values.reserve(batches_.size());
        for (const auto& b : batches_) values.push_back(fn(b.mean));
        return batch_means(values);
    }
    /// Estimates over the first and second half of each source's batches.
    std::pair<Estimate, Estimate> halves(Quantity q) const;

    /// Drops batches that started before `t` (used when the burn-in is extended).
    void discard_before(double t);

    /// Union of both batch sets; requires equal batch length.
    friend RunningStats merge(const RunningStats& a, const RunningStats& b);

private:
    void close_batch();

    double burn_in_;
    std::size_t batch_samples_;
    std::uint64_t source_;
    std::uint64_t next_index_ = 0;
    double last_t_ = -std::numeric_limits<double>::infinity();
    std::size_t count_ = 0;
    std::size_t open_count_ = 0;
    double open_start_ = 0.0;
    QuantityArray open_sum_{};
    std::vector<Batch> batches_;
};

struct BalanceReport {
    double nu = 0.0;
    double gamma = 0.0;
    double q_total = 0.0;     ///< Q = sum |k|^2 q_k
    double q_velocity = 0.0;  ///< Q_u = sum q_k
    std::size_t batches = 0;

    Estimate energy;
    Estimate enstrophy;
    Estimate palinstrophy;
    Estimate l4;
    Estimate l2_weighted_grad;

    Estimate nu_term;             ///< nu <||grad xi||^2>
    Estimate gamma_term;          ///< gamma <||xi||^2>
    Estimate residual_enstrophy;  ///< nu <||grad xi||^2> + gamma <||xi||^2> - Q
    Estimate nu_energy_term;      ///< nu <||xi||^2> = nu <||grad u||^2>
    Estimate gamma_energy_term;   ///< gamma <||u||^2>
    Estimate residual_energy;     ///< nu <||xi||^2> + gamma <||u||^2> - Q_u
    /// 3 nu <|| |xi| grad xi ||^2> + gamma <||xi||^4_{L^4}> - 3 Q/(4 pi^2) <||xi||^2>,
    /// the p = 4 balance with the Ito density of the orthonormal basis
    /// ("normalization-corrected"). Exact for the linear system only.
    Estimate residual_p4;

    Estimate l4_first_half;
    Estimate l4_second_half;
    /// |first - second| <= 2 sqrt(se1^2 + se2^2)
    bool l4_stable = false;
};

/// Throws InsufficientBatches when fewer than kMinBatches batches are complete.
BalanceReport balance_report(const RunningStats& stats, const SimParams& params);

/// Enstrophy spectrum binned by round(|k|): E(b) = sum_{round|k| = b} |xi_k|^2.
std::vector<double> enstrophy_spectrum(const SpectralField& xi);

/// Time-averaged enstrophy spectrum over post-burn-in samples.
class SpectrumAverage {
public:
    explicit SpectrumAverage(double burn_in = 0.0) : burn_in_(burn_in) {}
    void add(const SpectralField& xi, double t);
    std::size_t count() const { return count_; }
    std::vector<double> mean() const;
    /// Pools samples; order of merging affects only the last bits of the sums.
    void merge(const SpectrumAverage& other);

private:
    double burn_in_;
    std::size_t count_ = 0;
    std::vector<double> sum_;
};

/// 17 significant digits, round-trip exact.
std::string format_double(double v);

inline constexpr const char* kTimeseriesHeader = "t,energy,enstrophy,palinstrophy,l4,l2wgrad";
std::string timeseries_row(const Observables& obs);

std::string balance_csv_header();
std::string balance_csv_row(const BalanceReport& r);

}  // namespace sdns
