#include "sdns/diagnostics.hpp"

#include "fft_engine.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

namespace sdns {

Observables observables(const SpectralField& xi, double t) {
    Observables obs;
    obs.t = t;
    const TruncationSpec& trunc = xi.truncation();
    const auto c = xi.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Wavevector k = trunc.wavevector(i);
        if (k.is_zero()) continue;
        const double a2 = std::norm(c[i]);
        const double k2 = k.norm2();
        obs.energy += a2 / k2;
        obs.enstrophy += a2;
        obs.palinstrophy += a2 * k2;
    }

    const int points = 2 * trunc.grid_points();
    auto& engine = detail::fft_engine(points, trunc.max_mode());
    engine.synthesize(xi, [](Wavevector) { return Complex{1.0, 0.0}; }, engine.real(0));
    engine.synthesize(xi, [](Wavevector k) { return Complex{0.0, double(k.k1)}; }, engine.real(1));
    engine.synthesize(xi, [](Wavevector k) { return Complex{0.0, double(k.k2)}; }, engine.real(2));
    const double* v = engine.real(0);
    const double* g1 = engine.real(1);
    const double* g2 = engine.real(2);
    double l4 = 0.0;
    double wgrad = 0.0;
    for (std::size_t j = 0; j < engine.real_size(); ++j) {
        const double v2 = v[j] * v[j];
        l4 += v2 * v2;
        wgrad += v2 * (g1[j] * g1[j] + g2[j] * g2[j]);
    }
    const double dx = 2.0 * std::numbers::pi / points;
    obs.l4 = l4 * dx * dx;
    obs.l2_weighted_grad = wgrad * dx * dx;
    return obs;
}

QuantityArray to_array(const Observables& obs) {
    return {obs.energy, obs.enstrophy, obs.palinstrophy, obs.l4, obs.l2_weighted_grad};
}

const char* quantity_name(Quantity q) {
    switch (q) {
        case Quantity::energy: return "energy";
        case Quantity::enstrophy: return "enstrophy";
        case Quantity::palinstrophy: return "palinstrophy";
        case Quantity::l4: return "l4";
        case Quantity::l2_weighted_grad: return "l2wgrad";
    }
    return "?";
}

// ---------------------------------------------------------------------------

Estimate batch_means(std::span<const double> values) {
    Estimate e;
    const std::size_t n = values.size();
    if (n < kMinBatches) return e;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(n - 1);
    const boost::math::students_t dist(static_cast<double>(n - 1));
    const double t_crit = boost::math::quantile(dist, 0.975);
    e.mean = mean;
    e.std_error = std::sqrt(var / static_cast<double>(n));
    e.half_width = t_crit * e.std_error;
    e.batches = n;
    return e;
}

Estimate scaled(const Estimate& e, double factor) {
    Estimate out = e;
    out.mean = e.mean * factor;
    out.half_width = e.half_width * std::abs(factor);
    out.std_error = e.std_error * std::abs(factor);
    return out;
}

RunningStats::RunningStats(double burn_in, std::size_t batch_samples, std::uint64_t source)
    : burn_in_(burn_in), batch_samples_(batch_samples), source_(source) {
    if (!(burn_in >= 0.0)) throw std::invalid_argument("running stats: burn-in must be >= 0");
    if (batch_samples == 0) throw std::invalid_argument("running stats: batch length must be >= 1");
}

RunningStats RunningStats::for_run(double burn_in, double t_end, double sample_interval, std::size_t n_batches,
                                   std::uint64_t source) {
    if (!(sample_interval > 0.0)) throw std::invalid_argument("running stats: sample interval must be > 0");
    if (n_batches == 0) throw std::invalid_argument("running stats: n_batches must be >= 1");
    const double span = std::max(0.0, t_end - burn_in);
    const auto samples = static_cast<std::size_t>(std::floor(span / sample_interval + 1e-9)) + 1;
    return RunningStats(burn_in, std::max<std::size_t>(1, samples / n_batches), source);
}

void RunningStats::update(const Observables& obs) {
    if (!(obs.t > last_t_)) throw std::invalid_argument("running stats: sample times must increase");
    last_t_ = obs.t;
    if (obs.t < burn_in_) return;
    const QuantityArray values = to_array(obs);
    if (open_count_ == 0) open_start_ = obs.t;
    for (std::size_t q = 0; q < kQuantityCount; ++q) open_sum_[q] += values[q];
    ++open_count_;
    ++count_;
    if (open_count_ == batch_samples_) close_batch();
}

void RunningStats::close_batch() {
    Batch b;
    b.source = source_;
    b.index = next_index_++;
    b.t_start = open_start_;
    for (std::size_t q = 0; q < kQuantityCount; ++q) b.mean[q] = open_sum_[q] / static_cast<double>(open_count_);
    batches_.push_back(b);
    open_sum_ = {};
    open_count_ = 0;
}

Estimate RunningStats::estimate(Quantity q) const {
    const auto idx = static_cast<std::size_t>(q);
    return estimate_of([idx](const QuantityArray& m) { return m[idx]; });
}

std::pair<Estimate, Estimate> RunningStats::halves(Quantity q) const {
    const auto idx = static_cast<std::size_t>(q);
    std::map<std::uint64_t, std::size_t> per_source;
    for (const auto& b : batches_) ++per_source[b.source];
    std::map<std::uint64_t, std::size_t> seen;
    std::vector<double> first, second;
    for (const auto& b : batches_) {
        const std::size_t pos = seen[b.source]++;
        (pos < per_source[b.source] / 2 ? first : second).push_back(b.mean[idx]);
    }
    return {batch_means(first), batch_means(second)};
}

void RunningStats::discard_before(double t) {
    std::erase_if(batches_, [t](const Batch& b) { return b.t_start < t; });
}

RunningStats merge(const RunningStats& a, const RunningStats& b) {
    if (a.batch_samples_ != b.batch_samples_) {
        throw std::invalid_argument("running stats: cannot merge different batch lengths");
    }
    RunningStats out(std::max(a.burn_in_, b.burn_in_), a.batch_samples_, std::min(a.source_, b.source_));
    out.batches_ = a.batches_;
    out.batches_.insert(out.batches_.end(), b.batches_.begin(), b.batches_.end());
    const auto key = [](const RunningStats::Batch& x) { return std::pair{x.source, x.index}; };
    std::sort(out.batches_.begin(), out.batches_.end(),
              [&](const auto& x, const auto& y) { return key(x) < key(y); });
    const auto dup = std::adjacent_find(out.batches_.begin(), out.batches_.end(),
                                        [&](const auto& x, const auto& y) { return key(x) == key(y); });
    if (dup != out.batches_.end()) throw std::invalid_argument("running stats: merging overlapping sources");
    out.count_ = a.count_ + b.count_;
    out.last_t_ = std::max(a.last_t_, b.last_t_);
    out.next_index_ = std::max(a.next_index_, b.next_index_);
    return out;
}

// ---------------------------------------------------------------------------

BalanceReport balance_report(const RunningStats& stats, const SimParams& params) {
    if (stats.batch_count() < kMinBatches) {
        throw InsufficientBatches("balance report needs at least " + std::to_string(kMinBatches) +
                                  " batches, have " + std::to_string(stats.batch_count()));
    }
    BalanceReport r;
    r.nu = params.nu;
    r.gamma = params.gamma;
    r.q_total = total_q(params.noise);
    r.q_velocity = total_q_velocity(params.noise);
    r.batches = stats.batch_count();

    r.energy = stats.estimate(Quantity::energy);
    r.enstrophy = stats.estimate(Quantity::enstrophy);
    r.palinstrophy = stats.estimate(Quantity::palinstrophy);
    r.l4 = stats.estimate(Quantity::l4);
    r.l2_weighted_grad = stats.estimate(Quantity::l2_weighted_grad);

    const double nu = params.nu;
    const double gamma = params.gamma;
    const double q = r.q_total;
    const double qu = r.q_velocity;
    constexpr auto E = static_cast<std::size_t>(Quantity::energy);
    constexpr auto Z = static_cast<std::size_t>(Quantity::enstrophy);
    constexpr auto P = static_cast<std::size_t>(Quantity::palinstrophy);
    constexpr auto L4 = static_cast<std::size_t>(Quantity::l4);
    constexpr auto W = static_cast<std::size_t>(Quantity::l2_weighted_grad);

    r.nu_term = scaled(r.palinstrophy, nu);
    r.gamma_term = scaled(r.enstrophy, gamma);
    r.residual_enstrophy = stats.estimate_of([=](const QuantityArray& m) { return nu * m[P] + gamma * m[Z] - q; });
    r.nu_energy_term = scaled(r.enstrophy, nu);
    r.gamma_energy_term = scaled(r.energy, gamma);
    r.residual_energy = stats.estimate_of([=](const QuantityArray& m) { return nu * m[Z] + gamma * m[E] - qu; });
    const double ito = 3.0 * q / (4.0 * std::numbers::pi * std::numbers::pi);
    r.residual_p4 =
        stats.estimate_of([=](const QuantityArray& m) { return 3.0 * nu * m[W] + gamma * m[L4] - ito * m[Z]; });

    std::tie(r.l4_first_half, r.l4_second_half) = stats.halves(Quantity::l4);
    if (r.l4_first_half.available() && r.l4_second_half.available()) {
        const double joint = std::hypot(r.l4_first_half.std_error, r.l4_second_half.std_error);
        r.l4_stable = std::isfinite(r.l4.mean) && std::abs(r.l4_first_half.mean - r.l4_second_half.mean) <= 2.0 * joint;
    }
    return r;
}

// ---------------------------------------------------------------------------

std::vector<double> enstrophy_spectrum(const SpectralField& xi) {
    const TruncationSpec& trunc = xi.truncation();
    const auto bins = static_cast<std::size_t>(std::llround(std::sqrt(2.0) * trunc.max_mode())) + 1;
    std::vector<double> out(bins, 0.0);
    const auto c = xi.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Wavevector k = trunc.wavevector(i);
        if (k.is_zero()) continue;
        out[static_cast<std::size_t>(std::llround(std::sqrt(double(k.norm2()))))] += std::norm(c[i]);
    }
    return out;
}

void SpectrumAverage::add(const SpectralField& xi, double t) {
    if (t < burn_in_) return;
    const auto s = enstrophy_spectrum(xi);
    if (sum_.empty()) sum_.assign(s.size(), 0.0);
    if (s.size() != sum_.size()) throw TruncationMismatch("spectrum: bin count changed");
    for (std::size_t i = 0; i < s.size(); ++i) sum_[i] += s[i];
    ++count_;
}

std::vector<double> SpectrumAverage::mean() const {
    std::vector<double> out(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i) out[i] = sum_[i] / static_cast<double>(count_);
    return out;
}

void SpectrumAverage::merge(const SpectrumAverage& other) {
    if (other.count_ == 0) return;
    if (sum_.empty()) sum_.assign(other.sum_.size(), 0.0);
    if (other.sum_.size() != sum_.size()) throw TruncationMismatch("spectrum: bin count mismatch");
    for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += other.sum_[i];
    count_ += other.count_;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string timeseries_row(const Observables& obs) {
    std::string row = format_double(obs.t);
    for (double v : to_array(obs)) {
        row += ',';
        row += format_double(v);
    }
    return row;
}

namespace {

struct NamedEstimate {
    const char* name;
    const Estimate BalanceReport::*member;
};

constexpr NamedEstimate kBalanceColumns[] = {
    {"energy", &BalanceReport::energy},
    {"enstrophy", &BalanceReport::enstrophy},
    {"palinstrophy", &BalanceReport::palinstrophy},
    {"l4", &BalanceReport::l4},
    {"l2wgrad", &BalanceReport::l2_weighted_grad},
    {"nu_term", &BalanceReport::nu_term},
    {"gamma_term", &BalanceReport::gamma_term},
    {"residual_enstrophy", &BalanceReport::residual_enstrophy},
    {"nu_energy_term", &BalanceReport::nu_energy_term},
    {"gamma_energy_term", &BalanceReport::gamma_energy_term},
    {"residual_energy", &BalanceReport::residual_energy},
    {"residual_p4", &BalanceReport::residual_p4},
};

}  // namespace

std::string balance_csv_header() {
    std::string h = "nu,gamma,Q,Q_u,batches";
    for (const auto& col : kBalanceColumns) {
        h += ',';
        h += col.name;
        h += ",";
        h += col.name;
        h += "_ci";
    }
    h += ",l4_stable";
    return h;
}

std::string balance_csv_row(const BalanceReport& r) {
    std::ostringstream os;
    os << format_double(r.nu) << ',' << format_double(r.gamma) << ',' << format_double(r.q_total) << ','
       << format_double(r.q_velocity) << ',' << r.batches;
    for (const auto& col : kBalanceColumns) {
        const Estimate& e = r.*(col.member);
        os << ',' << format_double(e.mean) << ',' << format_double(e.half_width);
    }
    os << ',' << (r.l4_stable ? 1 : 0);
    return os.str();
}

}  // namespace sdns
