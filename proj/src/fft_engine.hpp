#pragma once

#include "sdns/spectral.hpp"

#include <fftw3.h>

#include <array>

namespace sdns::detail {

/// Real 2-D FFT of size n x n for fields band-limited to |k|_inf <= band.
///
/// Transforms are split into a column pass restricted to the band+1 non-zero
/// half-spectrum columns and a row pass of 1-D real transforms. Plans use FFTW_ESTIMATE so the
/// chosen algorithm, and hence every rounding, is the same from run to run.
class FftEngine {
public:
    static constexpr int kRealBuffers = 5;

    FftEngine(int n, int band);
    ~FftEngine();
    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

    int size() const { return n_; }
    int band() const { return band_; }
    double* real(int i) { return real_[i]; }
    std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_; }

    /// out(x_j) = sum_k mult(k) f_k e_k(x_j) over the stored modes of f.
    template <class Multiplier>
    void synthesize(const SpectralField& f, Multiplier mult, double* out);

    /// Coefficients of the grid data `in` on every |k|_inf <= cutoff of `out`;
    /// all other coefficients of `out` are zeroed.
    void analyze(const double* in, SpectralField& out, int cutoff);

private:
    void clear_spectrum();
    fftw_complex& spec_at(int k1, int k2) {
        const int m1 = k1 < 0 ? k1 + n_ : k1;
        return spec_[static_cast<std::size_t>(m1) * stride_ + k2];
    }
    void execute_backward(double* out);

    int n_;
    int half_;
    int stride_;  ///< spectrum row pitch, padded so every row keeps the allocation's alignment
    int band_;
    fftw_complex* spec_;
    std::array<double*, kRealBuffers> real_{};
    fftw_plan row_forward_;
    fftw_plan cols_forward_;
    fftw_plan cols_backward_;
    fftw_plan row_backward_;
};

/// Per-thread engine cache keyed by (grid size, band).
FftEngine& fft_engine(int n, int band);

template <class Multiplier>
void FftEngine::synthesize(const SpectralField& f, Multiplier mult, double* out) {
    const TruncationSpec& trunc = f.truncation();
    const int big_k = trunc.max_mode();
    const int side = trunc.side();
    const auto coeffs = f.coefficients();
    constexpr double kInvTwoPi = 0.15915494309189533577;
    clear_spectrum();
    for (int k1 = -big_k; k1 <= big_k; ++k1) {
        const std::size_t row = static_cast<std::size_t>(k1 + big_k) * side + big_k;
        fftw_complex* dst = &spec_at(k1, 0);
        for (int k2 = 0; k2 <= big_k; ++k2) {
            const Complex c = coeffs[row + k2];
            if (c.real() == 0.0 && c.imag() == 0.0) continue;
            // x_j = -pi + 2 pi j/n contributes exp(-i pi (k1 + k2)) = (-1)^(k1+k2)
            const double sign = ((k1 + k2) & 1) ? -kInvTwoPi : kInvTwoPi;
            const Complex v = mult(Wavevector{k1, k2}) * c * sign;
            dst[k2][0] = v.real();
            dst[k2][1] = v.imag();
        }
    }
    execute_backward(out);
}

}  // namespace sdns::detail
