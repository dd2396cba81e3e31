#pragma once

// Independent reference computations used by the tests. None of these call
// the FFT path of the library; they evaluate sums directly.

#include "sdns/noise.hpp"
#include "sdns/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using sdns::Complex;
using sdns::SpectralField;
using sdns::TruncationSpec;
using sdns::Wavevector;

inline constexpr double kPi = std::numbers::pi;

/// f(x) = sum_k f_k exp(i k.x) / (2 pi), summed mode by mode.
inline double evaluate(const SpectralField& f, double x1, double x2) {
    const int K = f.truncation().max_mode();
    Complex sum{};
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Complex c = f[{k1, k2}];
            if (c == Complex{}) continue;
            sum += c * std::polar(1.0, k1 * x1 + k2 * x2);
        }
    return sum.real() / (2.0 * kPi);
}

/// Grid point x_j = -pi + 2 pi j / n.
inline double grid_x(int j, int n) { return -kPi + 2.0 * kPi * j / n; }

/// Quadrature projection sum_j g(x_j) conj(e_k(x_j)) (2 pi / n)^2 of row-major grid data.
inline Complex project_mode(const std::vector<double>& g, int n, Wavevector k) {
    Complex sum{};
    for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; ++j2) {
            const double phase = k.k1 * grid_x(j1, n) + k.k2 * grid_x(j2, n);
            sum += g[static_cast<std::size_t>(j1) * n + j2] * std::polar(1.0, -phase);
        }
    const double dx = 2.0 * kPi / n;
    return sum * dx * dx / (2.0 * kPi);
}

/// Galerkin nonlinearity by direct convolution:
///   N_k = (1 / 2 pi) sum_{m + l = k} (m_perp . l) / |m|^2 xi_m xi_l,  |k|_inf <= cutoff.
inline SpectralField convolution_nonlinear(const SpectralField& xi) {
    const TruncationSpec& t = xi.truncation();
    const int K = t.max_mode();
    const int c = t.dealias_cutoff();
    SpectralField out(t);
    for (int k1 = -c; k1 <= c; ++k1)
        for (int k2 = -c; k2 <= c; ++k2) {
            const Wavevector k{k1, k2};
            if (!k.in_upper_half()) continue;
            Complex sum{};
            for (int m1 = -K; m1 <= K; ++m1)
                for (int m2 = -K; m2 <= K; ++m2) {
                    const Wavevector m{m1, m2};
                    const Wavevector l{k1 - m1, k2 - m2};
                    if (m.is_zero() || !t.contains(l)) continue;
                    const Complex a = xi[m];
                    const Complex b = xi[l];
                    if (a == Complex{} || b == Complex{}) continue;
                    const double w = double(-m2 * l.k1 + m1 * l.k2) / m.norm2();
                    sum += w * a * b;
                }
            out.set(k, sum / (2.0 * kPi));
        }
    return out;
}

/// Random real field with independent N(0, 1) + i N(0, 1) coefficients on 0 < |k|_inf <= band.
template <class Rng>
SpectralField random_field(const TruncationSpec& t, int band, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> n;
    SpectralField f(t);
    for (int k1 = 0; k1 <= band; ++k1)
        for (int k2 = -band; k2 <= band; ++k2) {
            const Wavevector k{k1, k2};
            if (!k.in_upper_half()) continue;
            f.set(k, scale * Complex{n(rng), n(rng)});
        }
    return f;
}

/// Sum of |f_k|^2 |k|^{2a}, mode by mode.
inline double sobolev_sq(const SpectralField& f, int a) {
    const int K = f.truncation().max_mode();
    double s = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Wavevector k{k1, k2};
            if (k.is_zero()) continue;
            s += std::norm(f[k]) * std::pow(double(k.norm2()), a);
        }
    return s;
}

/// gcd of all 2x2 minors of the stacked modes; the integer span is Z^2 iff this is 1.
inline long long gcd_of_minors(const std::vector<Wavevector>& modes) {
    long long g = 0;
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = i + 1; j < modes.size(); ++j) {
            const long long det =
                static_cast<long long>(modes[i].k1) * modes[j].k2 - static_cast<long long>(modes[i].k2) * modes[j].k1;
            g = std::gcd(g, det < 0 ? -det : det);
        }
    return g;
}

/// Stationary E|xi_k|^2 = q |k|^2 / (nu |k|^2 + gamma) summed over forced k, -k.
inline double ou_enstrophy(const std::vector<std::pair<Wavevector, double>>& forcing, double nu, double gamma) {
    double s = 0.0;
    for (const auto& [k, q] : forcing) s += 2.0 * q * k.norm2() / (nu * k.norm2() + gamma);
    return s;
}

}  // namespace oracle
