#pragma once

#include <complex>
#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdns {

using Complex = std::complex<double>;

/// Raised when two fields with different truncations meet in one operation.
class TruncationMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a transform or product produces NaN/Inf.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integer wavevector on the 2-torus.
struct Wavevector {
    int k1 = 0;
    int k2 = 0;

    constexpr int norm2() const { return k1 * k1 + k2 * k2; }
    constexpr int sup_norm() const {
        const int a = k1 < 0 ? -k1 : k1;
        const int b = k2 < 0 ? -k2 : k2;
        return a > b ? a : b;
    }
    constexpr Wavevector perp() const { return {-k2, k1}; }
    constexpr Wavevector operator-() const { return {-k1, -k2}; }
    constexpr bool is_zero() const { return k1 == 0 && k2 == 0; }
    /// Half-lattice Z^2_+: k1 > 0, or k1 == 0 and k2 > 0.
    constexpr bool in_upper_half() const { return k1 > 0 || (k1 == 0 && k2 > 0); }

    friend constexpr auto operator<=>(const Wavevector&, const Wavevector&) = default;
};

/// Square Galerkin truncation |k|_inf <= K sampled on an N x N grid.
///
/// The nonlinear product is projected onto |k|_inf <= dealias_cutoff, which
/// defaults to floor(2K/3).
class TruncationSpec {
public:
    /// K >= 2, N the smallest power of two >= 2K+2, 2/3-rule cutoff.
    explicit TruncationSpec(int max_mode);
    TruncationSpec(int max_mode, int grid_points, int dealias_cutoff);

    int max_mode() const { return max_mode_; }
    int grid_points() const { return grid_points_; }
    int dealias_cutoff() const { return dealias_cutoff_; }

    /// Number of stored modes per axis, 2K+1.
    int side() const { return 2 * max_mode_ + 1; }
    std::size_t mode_count() const { return static_cast<std::size_t>(side()) * side(); }

    bool contains(Wavevector k) const { return k.sup_norm() <= max_mode_; }
    /// Row-major index over k1 in [-K, K] (slow), k2 in [-K, K] (fast).
    std::size_t index(Wavevector k) const {
        return static_cast<std::size_t>(k1_offset(k.k1)) * side() + (k.k2 + max_mode_);
    }
    Wavevector wavevector(std::size_t index) const {
        const int s = side();
        return {static_cast<int>(index / s) - max_mode_, static_cast<int>(index % s) - max_mode_};
    }

    static int default_grid_points(int max_mode);

    friend bool operator==(const TruncationSpec&, const TruncationSpec&) = default;

private:
    int k1_offset(int k1) const { return k1 + max_mode_; }

    int max_mode_;
    int grid_points_;
    int dealias_cutoff_;
};

std::string describe(const TruncationSpec& trunc);

/// Real, mean-zero scalar field stored by its Fourier coefficients in the
/// orthonormal basis e_k = exp(i k.x) / (2 pi).
///
/// All (2K+1)^2 coefficients are stored; the (0,0) entry is kept at zero and
/// conjugate symmetry is maintained by set().
class SpectralField {
public:
    explicit SpectralField(const TruncationSpec& trunc);

    const TruncationSpec& truncation() const { return trunc_; }

    Complex operator[](Wavevector k) const;
    /// Sets coeff(k) = c and coeff(-k) = conj(c).
    void set(Wavevector k, Complex c);

    std::span<const Complex> coefficients() const { return coeffs_; }
    /// Raw access; callers are responsible for keeping the field real.
    std::span<Complex> coefficients() { return coeffs_; }

    bool all_finite() const;
    /// Largest |coeff(-k) - conj(coeff(k))| over stored modes, plus |coeff(0,0)|.
    double symmetry_defect() const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);

    friend bool operator==(const SpectralField&, const SpectralField&) = default;

private:
    TruncationSpec trunc_;
    std::vector<Complex> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Divergence-free velocity (u1, u2) sharing one truncation.
struct VelocityField {
    SpectralField u1;
    SpectralField u2;

    /// max_k |k1 u1(k) + k2 u2(k)|
    double divergence_defect() const;
};

/// Real samples on the uniform grid x_j = -pi + 2 pi j / n, row-major in (j1, j2).
struct GridField {
    TruncationSpec trunc;
    int points = 0;
    std::vector<double> values;

    double& at(int j1, int j2) { return values[static_cast<std::size_t>(j1) * points + j2]; }
    double at(int j1, int j2) const { return values[static_cast<std::size_t>(j1) * points + j2]; }
    /// Quadrature weight (2 pi / n)^2.
    double cell_area() const;
};

GridField to_grid(const SpectralField& f);
/// Samples on an n x n grid; n must exceed 2K so that no stored mode aliases.
GridField to_grid(const SpectralField& f, int points);
/// Projects onto the stored modes of g.trunc, dropping (0,0) and |k|_inf > K.
SpectralField from_grid(const GridField& g);

/// u = -i sum_k k_perp / |k|^2 xi_k e_k
VelocityField biot_savart(const SpectralField& xi);
/// xi = d u2/dx1 - d u1/dx2
SpectralField curl(const VelocityField& u);

/// Componentwise spectral derivatives d/dx1, d/dx2.
SpectralField derivative(const SpectralField& f, int axis);
SpectralField laplacian(const SpectralField& f);
SpectralField inverse_laplacian(const SpectralField& f);
/// Zeroes every mode with |k|_inf > cutoff.
SpectralField project(SpectralField f, int cutoff);

/// Dealiased Galerkin projection of u.grad(f), computed pseudo-spectrally.
/// Throws NonFiniteError if the grid product is not finite.
SpectralField advect(const VelocityField& u, const SpectralField& f);
/// advect(biot_savart(xi), xi)
SpectralField nonlinear_term(const SpectralField& xi);

/// Re sum_k |k|^{2a} f_k conj(g_k)
double inner_product(const SpectralField& f, const SpectralField& g, double a = 0.0);
double sobolev_norm(const SpectralField& f, double a);
double sobolev_norm(const VelocityField& u, double a);
/// Grid quadrature (sum |f(x_j)|^p (2 pi/n)^2)^(1/p) on the native grid.
double lp_norm(const SpectralField& f, double p);
double lp_norm(const SpectralField& f, double p, int points);

}  // namespace sdns
