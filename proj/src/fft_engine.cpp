#include "fft_engine.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <stdexcept>
#include <utility>

namespace sdns::detail {

namespace {

// The FFTW planner is not re-entrant; plan creation and destruction share this lock.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

FftEngine::FftEngine(int n, int band) : n_(n), half_(n / 2 + 1), stride_(half_ + half_ % 2), band_(band) {
    if (band < 0 || band >= half_ - 1) throw std::invalid_argument("fft engine: band must be below n/2");
    const std::size_t real_count = static_cast<std::size_t>(n) * n;
    const std::size_t spec_count = static_cast<std::size_t>(n) * stride_;
    spec_ = fftw_alloc_complex(spec_count);
    for (auto& buf : real_) buf = fftw_alloc_real(real_count);
    if (spec_ == nullptr) throw std::bad_alloc();
    for (auto* buf : real_)
        if (buf == nullptr) throw std::bad_alloc();

    const int len[1] = {n};
    const int columns = band + 1;
    std::lock_guard lock(planner_mutex());
    // Row plans are re-executed on every row (new-array interface); the padded
    // pitch keeps each row at the alignment the plan was made for.
    row_forward_ = fftw_plan_dft_r2c_1d(n, real_[0], spec_, FFTW_ESTIMATE);
    cols_forward_ = fftw_plan_many_dft(1, len, columns, spec_, nullptr, stride_, 1, spec_, nullptr, stride_, 1,
                                       FFTW_FORWARD, FFTW_ESTIMATE);
    cols_backward_ = fftw_plan_many_dft(1, len, columns, spec_, nullptr, stride_, 1, spec_, nullptr, stride_, 1,
                                        FFTW_BACKWARD, FFTW_ESTIMATE);
    row_backward_ = fftw_plan_dft_c2r_1d(n, spec_, real_[0], FFTW_ESTIMATE);
    if (!row_forward_ || !cols_forward_ || !cols_backward_ || !row_backward_) {
        throw std::runtime_error("fft engine: FFTW planning failed");
    }
}

FftEngine::~FftEngine() {
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(row_forward_);
        fftw_destroy_plan(cols_forward_);
        fftw_destroy_plan(cols_backward_);
        fftw_destroy_plan(row_backward_);
    }
    fftw_free(spec_);
    for (auto* buf : real_) fftw_free(buf);
}

void FftEngine::clear_spectrum() {
    const std::size_t count = static_cast<std::size_t>(n_) * stride_;
    std::fill_n(&spec_[0][0], 2 * count, 0.0);
}

void FftEngine::execute_backward(double* out) {
    fftw_execute(cols_backward_);
    for (int j = 0; j < n_; ++j) {
        fftw_execute_dft_c2r(row_backward_, spec_ + static_cast<std::size_t>(j) * stride_,
                             out + static_cast<std::size_t>(j) * n_);
    }
}

void FftEngine::analyze(const double* in, SpectralField& out, int cutoff) {
    const TruncationSpec& trunc = out.truncation();
    if (trunc.max_mode() > band_) throw std::invalid_argument("fft engine: truncation exceeds engine band");
    for (int j = 0; j < n_; ++j) {
        fftw_execute_dft_r2c(row_forward_, const_cast<double*>(in) + static_cast<std::size_t>(j) * n_,
                             spec_ + static_cast<std::size_t>(j) * stride_);
    }
    fftw_execute(cols_forward_);

    constexpr double kTwoPi = 6.28318530717958647693;
    const double scale = kTwoPi / (static_cast<double>(n_) * n_);
    auto coeffs = out.coefficients();
    std::fill(coeffs.begin(), coeffs.end(), Complex{});
    const int c = std::min(cutoff, trunc.max_mode());
    for (int k1 = -c; k1 <= c; ++k1) {
        for (int k2 = 0; k2 <= c; ++k2) {
            // the r2c half-spectrum holds k2 >= 0; k2 = 0 is taken for k1 > 0 and mirrored
            if (k2 == 0 && k1 <= 0) continue;
            const Wavevector k{k1, k2};
            const fftw_complex& s = spec_at(k1, k2);
            const double sign = ((k1 + k2) & 1) ? -scale : scale;
            const Complex x{s[0] * sign, s[1] * sign};
            coeffs[trunc.index(k)] = x;
            coeffs[trunc.index(-k)] = std::conj(x);
        }
    }
}

FftEngine& fft_engine(int n, int band) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<FftEngine>> cache;
    auto& slot = cache[{n, band}];
    if (!slot) slot = std::make_unique<FftEngine>(n, band);
    return *slot;
}

}  // namespace sdns::detail
