#include "sdns/spectral.hpp"

#include "fft_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sdns {

namespace {

constexpr double kTwoPi = 6.28318530717958647693;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require_same(const TruncationSpec& a, const TruncationSpec& b, const char* where) {
    if (!(a == b)) {
        throw TruncationMismatch(std::string(where) + ": truncation mismatch (" + describe(a) +
                                 " vs " + describe(b) + ")");
    }
}

template <class Fn>
SpectralField map_modes(const SpectralField& f, Fn fn) {
    SpectralField out(f.truncation());
    auto src = f.coefficients();
    auto dst = out.coefficients();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Wavevector k = f.truncation().wavevector(i);
        dst[i] = k.is_zero() ? Complex{} : fn(k, src[i]);
    }
    return out;
}

void require_finite(const double* data, std::size_t n, const char* where) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(data[i])) throw NonFiniteError(std::string(where) + ": non-finite grid value");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// TruncationSpec

int TruncationSpec::default_grid_points(int max_mode) {
    int n = 1;
    while (n < 2 * max_mode + 2) n *= 2;
    return n;
}

TruncationSpec::TruncationSpec(int max_mode)
    : TruncationSpec(max_mode, default_grid_points(max_mode), (2 * max_mode) / 3) {}

TruncationSpec::TruncationSpec(int max_mode, int grid_points, int dealias_cutoff)
    : max_mode_(max_mode), grid_points_(grid_points), dealias_cutoff_(dealias_cutoff) {
    if (max_mode < 2) throw std::invalid_argument("truncation: K must be >= 2");
    if (grid_points < 2 * max_mode + 2 || !is_power_of_two(grid_points)) {
        throw std::invalid_argument("truncation: N must be a power of two >= 2K+2");
    }
    if (dealias_cutoff < 1 || dealias_cutoff > max_mode) {
        throw std::invalid_argument("truncation: dealias cutoff must lie in [1, K]");
    }
}

std::string describe(const TruncationSpec& trunc) {
    std::ostringstream os;
    os << "K=" << trunc.max_mode() << " N=" << trunc.grid_points() << " cutoff=" << trunc.dealias_cutoff();
    return os.str();
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(const TruncationSpec& trunc) : trunc_(trunc), coeffs_(trunc.mode_count()) {}

Complex SpectralField::operator[](Wavevector k) const {
    if (!trunc_.contains(k)) return {};
    return coeffs_[trunc_.index(k)];
}

void SpectralField::set(Wavevector k, Complex c) {
    if (k.is_zero()) throw std::invalid_argument("spectral field: the (0,0) mode is excluded");
    if (!trunc_.contains(k)) throw std::out_of_range("spectral field: mode outside truncation");
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        throw std::invalid_argument("spectral field: non-finite coefficient");
    }
    coeffs_[trunc_.index(k)] = c;
    coeffs_[trunc_.index(-k)] = std::conj(c);
}

bool SpectralField::all_finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(),
                       [](Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

double SpectralField::symmetry_defect() const {
    double worst = std::abs(coeffs_[trunc_.index({0, 0})]);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const Wavevector k = trunc_.wavevector(i);
        worst = std::max(worst, std::abs(coeffs_[trunc_.index(-k)] - std::conj(coeffs_[i])));
    }
    return worst;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    require_same(trunc_, other.trunc_, "add");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    require_same(trunc_, other.trunc_, "subtract");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

double VelocityField::divergence_defect() const {
    require_same(u1.truncation(), u2.truncation(), "divergence");
    double worst = 0.0;
    const auto a = u1.coefficients();
    const auto b = u2.coefficients();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Wavevector k = u1.truncation().wavevector(i);
        worst = std::max(worst, std::abs(double(k.k1) * a[i] + double(k.k2) * b[i]));
    }
    return worst;
}

double GridField::cell_area() const {
    const double dx = kTwoPi / points;
    return dx * dx;
}

// ---------------------------------------------------------------------------
// Transforms

GridField to_grid(const SpectralField& f) { return to_grid(f, f.truncation().grid_points()); }

GridField to_grid(const SpectralField& f, int points) {
    const TruncationSpec& trunc = f.truncation();
    if (points <= 2 * trunc.max_mode() || !is_power_of_two(points)) {
        throw std::invalid_argument("to_grid: grid must be a power of two larger than 2K");
    }
    if (!f.all_finite()) throw NonFiniteError("to_grid: non-finite coefficient");
    GridField g{trunc, points, std::vector<double>(static_cast<std::size_t>(points) * points)};
    auto& engine = detail::fft_engine(points, trunc.max_mode());
    engine.synthesize(f, [](Wavevector) { return Complex{1.0, 0.0}; }, g.values.data());
    return g;
}

SpectralField from_grid(const GridField& g) {
    if (g.points <= 2 * g.trunc.max_mode() || !is_power_of_two(g.points) ||
        g.values.size() != static_cast<std::size_t>(g.points) * g.points) {
        throw std::invalid_argument("from_grid: malformed grid");
    }
    require_finite(g.values.data(), g.values.size(), "from_grid");
    SpectralField f(g.trunc);
    auto& engine = detail::fft_engine(g.points, g.trunc.max_mode());
    std::copy(g.values.begin(), g.values.end(), engine.real(0));
    engine.analyze(engine.real(0), f, g.trunc.max_mode());
    return f;
}

// ---------------------------------------------------------------------------
// Differential operators

VelocityField biot_savart(const SpectralField& xi) {
    const Complex minus_i{0.0, -1.0};
    // k_perp = (-k2, k1)
    auto u1 = map_modes(xi, [&](Wavevector k, Complex c) { return minus_i * (double(-k.k2) / k.norm2()) * c; });
    auto u2 = map_modes(xi, [&](Wavevector k, Complex c) { return minus_i * (double(k.k1) / k.norm2()) * c; });
    return {std::move(u1), std::move(u2)};
}

SpectralField curl(const VelocityField& u) {
    require_same(u.u1.truncation(), u.u2.truncation(), "curl");
    SpectralField out(u.u1.truncation());
    const auto a = u.u1.coefficients();
    const auto b = u.u2.coefficients();
    auto dst = out.coefficients();
    const Complex i{0.0, 1.0};
    for (std::size_t n = 0; n < dst.size(); ++n) {
        const Wavevector k = out.truncation().wavevector(n);
        dst[n] = k.is_zero() ? Complex{} : i * (double(k.k1) * b[n] - double(k.k2) * a[n]);
    }
    return out;
}

SpectralField derivative(const SpectralField& f, int axis) {
    if (axis != 0 && axis != 1) throw std::invalid_argument("derivative: axis must be 0 or 1");
    return map_modes(f, [axis](Wavevector k, Complex c) {
        return Complex{0.0, double(axis == 0 ? k.k1 : k.k2)} * c;
    });
}

SpectralField laplacian(const SpectralField& f) {
    return map_modes(f, [](Wavevector k, Complex c) { return -double(k.norm2()) * c; });
}

SpectralField inverse_laplacian(const SpectralField& f) {
    return map_modes(f, [](Wavevector k, Complex c) { return c / -double(k.norm2()); });
}

SpectralField project(SpectralField f, int cutoff) {
    auto c = f.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (f.truncation().wavevector(i).sup_norm() > cutoff) c[i] = Complex{};
    }
    return f;
}

// ---------------------------------------------------------------------------
// Nonlinear term

namespace {

// Grid buffers 0..3 hold u1, u2, d1 f, d2 f; returns P_cutoff(u . grad f).
SpectralField finish_advection(detail::FftEngine& engine, const TruncationSpec& trunc) {
    const std::size_t n = engine.real_size();
    const double* ux = engine.real(0);
    const double* uy = engine.real(1);
    const double* fx = engine.real(2);
    const double* fy = engine.real(3);
    double* prod = engine.real(4);
    for (std::size_t j = 0; j < n; ++j) prod[j] = ux[j] * fx[j] + uy[j] * fy[j];
    require_finite(prod, n, "advect");

    SpectralField out(trunc);
    engine.analyze(prod, out, trunc.dealias_cutoff());
    return out;
}

const auto kDerivative1 = [](Wavevector k) { return Complex{0.0, double(k.k1)}; };
const auto kDerivative2 = [](Wavevector k) { return Complex{0.0, double(k.k2)}; };

}  // namespace

SpectralField advect(const VelocityField& u, const SpectralField& f) {
    const TruncationSpec& trunc = f.truncation();
    require_same(u.u1.truncation(), trunc, "advect");
    require_same(u.u2.truncation(), trunc, "advect");

    auto& engine = detail::fft_engine(trunc.grid_points(), trunc.max_mode());
    const auto one = [](Wavevector) { return Complex{1.0, 0.0}; };
    engine.synthesize(u.u1, one, engine.real(0));
    engine.synthesize(u.u2, one, engine.real(1));
    engine.synthesize(f, kDerivative1, engine.real(2));
    engine.synthesize(f, kDerivative2, engine.real(3));
    return finish_advection(engine, trunc);
}

SpectralField nonlinear_term(const SpectralField& xi) {
    const TruncationSpec& trunc = xi.truncation();
    auto& engine = detail::fft_engine(trunc.grid_points(), trunc.max_mode());
    // Biot-Savart multipliers -i k_perp / |k|^2 applied during synthesis
    engine.synthesize(xi, [](Wavevector k) { return Complex{0.0, double(k.k2) / k.norm2()}; }, engine.real(0));
    engine.synthesize(xi, [](Wavevector k) { return Complex{0.0, -double(k.k1) / k.norm2()}; }, engine.real(1));
    engine.synthesize(xi, kDerivative1, engine.real(2));
    engine.synthesize(xi, kDerivative2, engine.real(3));
    return finish_advection(engine, trunc);
}

// ---------------------------------------------------------------------------
// Norms

double inner_product(const SpectralField& f, const SpectralField& g, double a) {
    require_same(f.truncation(), g.truncation(), "inner_product");
    const auto x = f.coefficients();
    const auto y = g.coefficients();
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Wavevector k = f.truncation().wavevector(i);
        if (k.is_zero()) continue;
        const double w = a == 0.0 ? 1.0 : std::pow(double(k.norm2()), a);
        sum += w * (x[i].real() * y[i].real() + x[i].imag() * y[i].imag());
    }
    return sum;
}

double sobolev_norm(const SpectralField& f, double a) { return std::sqrt(inner_product(f, f, a)); }

double sobolev_norm(const VelocityField& u, double a) {
    return std::sqrt(inner_product(u.u1, u.u1, a) + inner_product(u.u2, u.u2, a));
}

double lp_norm(const SpectralField& f, double p) { return lp_norm(f, p, f.truncation().grid_points()); }

double lp_norm(const SpectralField& f, double p, int points) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const GridField g = to_grid(f, points);
    double sum = 0.0;
    if (p == 2.0) {
        for (double v : g.values) sum += v * v;
    } else if (p == 4.0) {
        for (double v : g.values) sum += (v * v) * (v * v);
    } else {
        for (double v : g.values) sum += std::pow(std::abs(v), p);
    }
    return std::pow(sum * g.cell_area(), 1.0 / p);
}

}  // namespace sdns
