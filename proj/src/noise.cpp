#include "sdns/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <array>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sdns {

NoiseSpec::NoiseSpec(const TruncationSpec& trunc) : trunc_(trunc) {}

NoiseSpec NoiseSpec::default_forcing(const TruncationSpec& trunc) {
    NoiseSpec spec(trunc);
    spec.add({1, 0}, 1.0);
    spec.add({1, 1}, 1.0);
    return spec;
}

void NoiseSpec::add(Wavevector k, double q) {
    if (k.is_zero()) throw std::invalid_argument("noise: the (0,0) mode cannot be forced (fields are mean-zero)");
    if (!trunc_.contains(k)) throw std::invalid_argument("noise: forced mode lies outside the truncation");
    if (!std::isfinite(q) || q < 0.0) throw std::invalid_argument("noise: q must be finite and >= 0");
    const Wavevector rep = k.in_upper_half() ? k : -k;
    if (!entries_.emplace(rep, q).second) throw std::invalid_argument("noise: mode pair forced twice");
}

double NoiseSpec::q(Wavevector k) const {
    const auto it = entries_.find(k.in_upper_half() ? k : -k);
    return it == entries_.end() ? 0.0 : it->second;
}

std::vector<Wavevector> NoiseSpec::forced_modes() const {
    std::vector<Wavevector> out;
    for (const auto& [k, q] : entries_)
        if (q > 0.0) out.push_back(k);
    return out;
}

std::uint64_t NoiseSpec::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto mix = [&h](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ull;
        }
    };
    const int dims[3] = {trunc_.max_mode(), trunc_.grid_points(), trunc_.dealias_cutoff()};
    mix(dims, sizeof dims);
    for (const auto& [k, q] : entries_) {
        const int kk[2] = {k.k1, k.k2};
        mix(kk, sizeof kk);
        mix(&q, sizeof q);
    }
    return h;
}

double total_q(const NoiseSpec& spec) {
    double sum = 0.0;
    for (const auto& [k, q] : spec.entries()) sum += 2.0 * k.norm2() * q;
    return sum;
}

double total_q_velocity(const NoiseSpec& spec) {
    double sum = 0.0;
    for (const auto& [k, q] : spec.entries()) sum += 2.0 * q;
    return sum;
}

// ---------------------------------------------------------------------------

long long lattice_index(const std::vector<Wavevector>& modes) {
    std::vector<std::array<long long, 2>> rows;
    for (const auto& k : modes) rows.push_back({k.k1, k.k2});

    // Euclid down the first column until a single pivot row remains.
    long long g1 = 0;
    for (;;) {
        auto best = rows.end();
        for (auto it = rows.begin(); it != rows.end(); ++it) {
            if ((*it)[0] != 0 && (best == rows.end() || std::llabs((*it)[0]) < std::llabs((*best)[0]))) best = it;
        }
        if (best == rows.end()) break;
        const auto p = *best;
        bool reduced = false;
        for (auto it = rows.begin(); it != rows.end(); ++it) {
            if (it == best || (*it)[0] == 0) continue;
            const long long m = (*it)[0] / p[0];
            (*it)[0] -= m * p[0];
            (*it)[1] -= m * p[1];
            reduced = true;
        }
        if (!reduced) {
            g1 = std::llabs(p[0]);
            rows.erase(best);
            break;
        }
    }
    if (g1 == 0) return 0;

    long long g2 = 0;
    for (const auto& r : rows) g2 = std::gcd(g2, std::llabs(r[1]));
    return g1 * g2;
}

HMReport check_hm_condition(const NoiseSpec& spec) {
    HMReport report;
    const auto half = spec.forced_modes();
    for (const auto& k : half) {
        report.forced_set.push_back(k);
        report.forced_set.push_back(-k);
    }
    for (const auto& k : half) report.distinct_norms.push_back(std::sqrt(double(k.norm2())));
    std::sort(report.distinct_norms.begin(), report.distinct_norms.end());
    report.distinct_norms.erase(std::unique(report.distinct_norms.begin(), report.distinct_norms.end()),
                                report.distinct_norms.end());

    report.has_two_norms = report.distinct_norms.size() >= 2;
    report.generates_lattice = !half.empty() && lattice_index(half) == 1;
    report.pass = !half.empty() && report.has_two_norms && report.generates_lattice;
    return report;
}

namespace {

std::string format_norm(double n) {
    const double sq = n * n;
    const long long r = std::llround(sq);
    const long long root = std::llround(std::sqrt(double(r)));
    std::ostringstream os;
    if (root * root == r) {
        os << root;
    } else {
        os << "√" << r;
    }
    return os.str();
}

}  // namespace

std::string HMReport::summary() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << ": norms {";
    for (std::size_t i = 0; i < distinct_norms.size(); ++i) {
        os << (i ? "," : "") << format_norm(distinct_norms[i]);
    }
    os << "}, lattice " << (generates_lattice ? "generated" : "not generated");
    if (forced_set.empty()) os << ", no forced modes";
    else if (!has_two_norms) os << ", only one distinct norm";
    return os.str();
}

// ---------------------------------------------------------------------------

SpectralField sample_curl_increment(const NoiseSpec& spec, double h, RngState& rng) {
    if (!(h >= 0.0)) throw std::invalid_argument("sample_curl_increment: h must be >= 0");
    const TruncationSpec& trunc = spec.truncation();
    SpectralField out(trunc);
    const double root_h = std::sqrt(h);
    for (const auto& [k, q] : spec.entries()) {
        if (q <= 0.0) continue;
        const auto [g_re, g_im] = rng.normal_pair(static_cast<std::uint32_t>(trunc.index(k)));
        const Complex g = root_h * Complex{g_re, g_im};
        out.set(k, Complex{0.0, std::sqrt(double(k.norm2()) * q)} * g);
    }
    rng.advance();
    return out;
}

double ou_mode_variance(const NoiseSpec& spec, Wavevector k, double nu, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("ou moments: gamma must be > 0");
    if (!(nu >= 0.0)) throw std::invalid_argument("ou moments: nu must be >= 0");
    const double k2 = k.norm2();
    return spec.q(k) * k2 / (nu * k2 + gamma);
}

OuMoments ou_stationary_moments(const NoiseSpec& spec, double nu, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("ou moments: gamma must be > 0");
    OuMoments m;
    for (const auto& [k, q] : spec.entries()) {
        const double var = ou_mode_variance(spec, k, nu, gamma);
        const double k2 = k.norm2();
        // +-k each contribute once
        m.enstrophy += 2.0 * var;
        m.energy += 2.0 * var / k2;
        m.palinstrophy_weighted += 2.0 * nu * k2 * var;
    }
    return m;
}

}  // namespace sdns
