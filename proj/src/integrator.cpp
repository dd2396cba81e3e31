#include "sdns/integrator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace sdns {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::size_t kHistoryLength = 64;
constexpr std::uint64_t kSpeedSampleInterval = 100;

}  // namespace

void SimParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be > 0");
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::invalid_argument("nu must be >= 0");
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("timestep h must be > 0");
    if (!(noise.truncation() == trunc)) throw TruncationMismatch("noise spec truncation differs from the run truncation");
}

double timestep_limit(const SimParams& params, double max_speed) {
    double limit = 0.1 / params.gamma;
    if (max_speed > 0.0) limit = std::min(limit, 0.25 / (params.trunc.max_mode() * max_speed));
    if (params.nu > 0.0) {
        const double k_eff = params.trunc.dealias_cutoff();
        limit = std::min(limit, 0.5 / (params.nu * k_eff * k_eff));
    }
    return limit;
}

double max_grid_speed(const SpectralField& xi) {
    const VelocityField u = biot_savart(xi);
    const GridField a = to_grid(u.u1);
    const GridField b = to_grid(u.u2);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        worst = std::max(worst, a.values[i] * a.values[i] + b.values[i] * b.values[i]);
    }
    return std::sqrt(worst);
}

State State::initial(const SimParams& params, std::uint64_t job) {
    return State{SpectralField(params.trunc), 0.0, RngState{params.seed, job, 0}, 0};
}

BlowUpError::BlowUpError(double t, std::vector<std::pair<double, double>> history)
    : std::runtime_error([t] {
          std::ostringstream os;
          os.precision(6);
          os << "trajectory blow-up at t = " << t;
          return os.str();
      }()),
      time_(t),
      history_(std::move(history)) {}

// ---------------------------------------------------------------------------

Integrator::Integrator(SimParams params) : params_(std::move(params)) {
    params_.validate();
    const TruncationSpec& trunc = params_.trunc;
    const double h = params_.h;
    decay_.resize(trunc.mode_count());
    for (std::size_t i = 0; i < decay_.size(); ++i) {
        const Wavevector k = trunc.wavevector(i);
        const double lambda = params_.nu * k.norm2() + params_.gamma;
        decay_[i] = k.is_zero() ? 0.0 : std::exp(-lambda * h);
    }
    for (const auto& [k, q] : params_.noise.entries()) {
        if (q <= 0.0) continue;
        const double k2 = k.norm2();
        const double lambda = params_.nu * k2 + params_.gamma;
        // (1 - exp(-2 lambda h)) / (2 lambda), written to stay accurate for small lambda h
        const double var_factor = -std::expm1(-2.0 * lambda * h) / (2.0 * lambda);
        forced_.push_back({trunc.index(k), trunc.index(-k), std::sqrt(q * k2 * var_factor)});
    }
    history_.reserve(kHistoryLength);
}

void Integrator::record(double t, double norm) {
    if (history_.size() < kHistoryLength) {
        history_.emplace_back(t, norm);
    } else {
        history_[history_head_] = {t, norm};
        history_head_ = (history_head_ + 1) % kHistoryLength;
    }
}

void Integrator::step(State& state) {
    if (!(state.xi.truncation() == params_.trunc)) throw TruncationMismatch("step: state truncation differs from params");
    const double h = params_.h;
    auto xi = state.xi.coefficients();

    auto blow_up = [&](double t) {
        std::vector<std::pair<double, double>> ordered(history_.begin() + history_head_, history_.end());
        ordered.insert(ordered.end(), history_.begin(), history_.begin() + history_head_);
        throw BlowUpError(t, std::move(ordered));
    };

    if (params_.nonlinear) {
        SpectralField n(params_.trunc);
        try {
            n = nonlinear_term(state.xi);
        } catch (const NonFiniteError&) {
            blow_up(state.t);
        }
        const auto nl = n.coefficients();
        for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = decay_[i] * (xi[i] - h * nl[i]);
    } else {
        for (std::size_t i = 0; i < xi.size(); ++i) xi[i] *= decay_[i];
    }

    for (const auto& mode : forced_) {
        const auto [g_re, g_im] = state.rng.normal_pair(static_cast<std::uint32_t>(mode.index));
        // i * amplitude * (g_re + i g_im)
        xi[mode.index] += Complex{-mode.amplitude * g_im, mode.amplitude * g_re};
        xi[mode.mirror] = std::conj(xi[mode.index]);
    }
    state.rng.advance();
    ++state.step_count;
    state.t = static_cast<double>(state.step_count) * h;

    double sum = 0.0;
    for (const auto& c : xi) sum += std::norm(c);
    const double norm = std::sqrt(sum);
    record(state.t, norm);
    if (!std::isfinite(norm)) blow_up(state.t);

    if (params_.nonlinear && state.step_count % kSpeedSampleInterval == 0) {
        const double speed = max_grid_speed(state.xi);
        max_speed_ = std::max(max_speed_, speed);
        if (h > timestep_limit(params_, speed)) ++warnings_;
    }
}

State Integrator::integrate(State state, double t_end, const Observer& observer, std::uint64_t observe_every) {
    if (t_end < state.t) throw std::invalid_argument("integrate: t_end precedes the current time");
    if (observe_every == 0) throw std::invalid_argument("integrate: observe_every must be >= 1");
    const auto n_steps = static_cast<std::uint64_t>(std::llround((t_end - state.t) / params_.h));
    for (std::uint64_t s = 0; s < n_steps; ++s) {
        step(state);
        if (observer && state.step_count % observe_every == 0) observer(state);
    }
    return state;
}

State step(State state, const SimParams& params) {
    Integrator integrator(params);
    integrator.step(state);
    return state;
}

State integrate(State state, const SimParams& params, double t_end, const Observer& observer,
                std::uint64_t observe_every) {
    Integrator integrator(params);
    return integrator.integrate(std::move(state), t_end, observer, observe_every);
}

// ---------------------------------------------------------------------------
// Checkpoint format, all little-endian:
//   "SDNSCKPT" | u32 version | u32 K | u32 N | f64 nu | f64 gamma | f64 h | u64 step_count
//   | (2K+1)^2 x (f64 re, f64 im), modes row-major in (k1, k2)
//   | u64 rng seed | u64 rng stream | u64 rng step
//   | u32 cutoff | u8 nonlinear | u64 params seed | u32 n_noise | n_noise x (i32 k1, i32 k2, f64 q)
//   | u64 FNV-1a of everything above

namespace {

constexpr char kMagic[8] = {'S', 'D', 'N', 'S', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(std::span<const std::byte> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::byte b : bytes) {
        h ^= static_cast<std::uint64_t>(b);
        h *= 0x100000001b3ull;
    }
    return h;
}

class Writer {
public:
    template <class T>
    void put(T v) {
        const auto* p = reinterpret_cast<const std::byte*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }
    void put_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::byte*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    std::vector<std::byte>& buffer() { return buf_; }

private:
    std::vector<std::byte> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const std::byte> data) : data_(data) {}
    template <class T>
    T get() {
        if (pos_ + sizeof(T) > data_.size()) throw CheckpointError("checkpoint: truncated blob");
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::size_t position() const { return pos_; }

private:
    std::span<const std::byte> data_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> checkpoint(const State& state, const SimParams& params) {
    params.validate();
    if (!(state.xi.truncation() == params.trunc)) throw TruncationMismatch("checkpoint: state/params truncation differ");
    Writer w;
    w.put_bytes(kMagic, sizeof kMagic);
    w.put<std::uint32_t>(kVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(params.trunc.max_mode()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(params.trunc.grid_points()));
    w.put<double>(params.nu);
    w.put<double>(params.gamma);
    w.put<double>(params.h);
    w.put<std::uint64_t>(state.step_count);
    for (const Complex& c : state.xi.coefficients()) {
        w.put<double>(c.real());
        w.put<double>(c.imag());
    }
    w.put<std::uint64_t>(state.rng.seed);
    w.put<std::uint64_t>(state.rng.stream);
    w.put<std::uint64_t>(state.rng.step);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(params.trunc.dealias_cutoff()));
    w.put<std::uint8_t>(params.nonlinear ? 1 : 0);
    w.put<std::uint64_t>(params.seed);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(params.noise.entries().size()));
    for (const auto& [k, q] : params.noise.entries()) {
        w.put<std::int32_t>(k.k1);
        w.put<std::int32_t>(k.k2);
        w.put<double>(q);
    }
    const std::uint64_t sum = fnv1a(w.buffer());
    w.put<std::uint64_t>(sum);
    return std::move(w.buffer());
}

std::pair<State, SimParams> restore(std::span<const std::byte> blob) {
    if (blob.size() < sizeof kMagic + sizeof(std::uint64_t)) throw CheckpointError("checkpoint: blob too short");
    const auto body = blob.first(blob.size() - sizeof(std::uint64_t));
    std::uint64_t stored;
    std::memcpy(&stored, blob.data() + body.size(), sizeof stored);
    if (fnv1a(body) != stored) throw CheckpointError("checkpoint: checksum mismatch (corrupted blob)");
    if (std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0) throw CheckpointError("checkpoint: bad magic");

    Reader r(body);
    for (std::size_t i = 0; i < sizeof kMagic; ++i) r.get<char>();
    const auto version = r.get<std::uint32_t>();
    if (version != kVersion) throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
    const auto big_k = r.get<std::uint32_t>();
    const auto n = r.get<std::uint32_t>();
    SimParams params;
    params.nu = r.get<double>();
    params.gamma = r.get<double>();
    params.h = r.get<double>();
    const auto step_count = r.get<std::uint64_t>();

    const std::size_t side = 2 * static_cast<std::size_t>(big_k) + 1;
    std::vector<Complex> coeffs(side * side);
    for (auto& c : coeffs) {
        const double re = r.get<double>();
        const double im = r.get<double>();
        c = {re, im};
    }
    RngState rng;
    rng.seed = r.get<std::uint64_t>();
    rng.stream = r.get<std::uint64_t>();
    rng.step = r.get<std::uint64_t>();
    const auto cutoff = r.get<std::uint32_t>();
    params.nonlinear = r.get<std::uint8_t>() != 0;
    params.seed = r.get<std::uint64_t>();

    try {
        params.trunc = TruncationSpec(static_cast<int>(big_k), static_cast<int>(n), static_cast<int>(cutoff));
    } catch (const std::invalid_argument& e) {
        throw CheckpointError(std::string("checkpoint: ") + e.what());
    }
    params.noise = NoiseSpec(params.trunc);
    const auto n_noise = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_noise; ++i) {
        const Wavevector k{r.get<std::int32_t>(), r.get<std::int32_t>()};
        params.noise.add(k, r.get<double>());
    }
    if (r.position() != body.size()) throw CheckpointError("checkpoint: trailing bytes");

    State state{SpectralField(params.trunc), static_cast<double>(step_count) * params.h, rng, step_count};
    std::copy(coeffs.begin(), coeffs.end(), state.xi.coefficients().begin());
    params.validate();
    return {std::move(state), std::move(params)};
}

std::pair<State, SimParams> restore(std::span<const std::byte> blob, const TruncationSpec& expected) {
    auto restored = restore(blob);
    if (!(restored.second.trunc == expected)) {
        throw CheckpointError("checkpoint: truncation mismatch, blob has " + describe(restored.second.trunc) +
                              ", run expects " + describe(expected));
    }
    return restored;
}

}  // namespace sdns
