#pragma once

#include "sdns/rng.hpp"
#include "sdns/spectral.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sdns {

/// Additive curl noise with variance rates q_k, q_{-k} = q_k.
///
/// Entries are keyed by their representative in the half-lattice Z^2_+;
/// the mirrored mode -k is implied.
class NoiseSpec {
public:
    explicit NoiseSpec(const TruncationSpec& trunc);

    /// Forcing used by all reference experiments: q = 1 on +-(1,0), +-(1,1).
    static NoiseSpec default_forcing(const TruncationSpec& trunc);

    /// Adds q for the pair +-k. Rejects k = 0, |k|_inf > K, negative or
    /// non-finite q, and a pair that is already present.
    void add(Wavevector k, double q);

    double q(Wavevector k) const;
    const TruncationSpec& truncation() const { return trunc_; }
    const std::map<Wavevector, double>& entries() const { return entries_; }
    /// Half-lattice representatives with q > 0.
    std::vector<Wavevector> forced_modes() const;
    bool empty() const { return forced_modes().empty(); }

    /// FNV-1a over the truncation and the (k, q) entries.
    std::uint64_t hash() const;

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;

private:
    TruncationSpec trunc_;
    std::map<Wavevector, double> entries_;
};

/// Q = sum over Z^2_0 of |k|^2 q_k (both k and -k counted).
double total_q(const NoiseSpec& spec);
/// Q_u = sum over Z^2_0 of q_k, the energy injection rate of the velocity noise.
double total_q_velocity(const NoiseSpec& spec);

struct HMReport {
    bool pass = false;
    bool has_two_norms = false;
    bool generates_lattice = false;
    std::vector<Wavevector> forced_set;  ///< both k and -k
    std::vector<double> distinct_norms;  ///< sorted |k| values over the forced set

    std::string summary() const;
};

/// Checks the finite-forcing condition for uniqueness of the invariant
/// measure: at least two forced norms, and the forced modes span Z^2 over
/// the integers (decided by Hermite reduction of the stacked mode matrix).
HMReport check_hm_condition(const NoiseSpec& spec);

/// Determinant of the Hermite basis of the lattice spanned by `modes`
/// (0 when the span has rank < 2). The span is Z^2 exactly when this is 1.
long long lattice_index(const std::vector<Wavevector>& modes);

/// One increment w_curl(t+h) - w_curl(t): coeff(k) = i|k| sqrt(q_k) g_k with
/// E|g_k|^2 = 2h. Consumes the current step of `rng` and advances it.
SpectralField sample_curl_increment(const NoiseSpec& spec, double h, RngState& rng);

struct OuMoments {
    double enstrophy = 0.0;
    double energy = 0.0;
    double palinstrophy_weighted = 0.0;  ///< nu * E||grad xi||^2
};

/// Stationary E|xi_k|^2 = q_k |k|^2 / (nu |k|^2 + gamma) of the linear system.
double ou_mode_variance(const NoiseSpec& spec, Wavevector k, double nu, double gamma);
/// Closed-form stationary second moments of the linear (Ornstein-Uhlenbeck) system.
OuMoments ou_stationary_moments(const NoiseSpec& spec, double nu, double gamma);

}  // namespace sdns
