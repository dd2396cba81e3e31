#include "sdns/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace sdns {

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::simulate: return "simulate";
        case Mode::sweep: return "sweep";
        case Mode::check_noise: return "check-noise";
        case Mode::spectrum: return "spectrum";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view name) {
    for (Mode m : {Mode::simulate, Mode::sweep, Mode::check_noise, Mode::spectrum})
        if (name == mode_name(m)) return m;
    return std::nullopt;
}

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::uint64_t RunConfig::resolved_replicas() const {
    if (replicas > 0) return replicas;
    return mode == Mode::sweep ? 4 : 1;
}

SimParams RunConfig::sim_params() const {
    SimParams p;
    p.nu = nu.value_or(0.0);
    p.gamma = gamma.value_or(1.0);
    p.h = h;
    p.trunc = N > 0 ? TruncationSpec(K, N, (2 * K) / 3) : TruncationSpec(K);
    p.noise = NoiseSpec(p.trunc);
    if (forcing.empty()) {
        p.noise = NoiseSpec::default_forcing(p.trunc);
    } else {
        for (const auto& [k1, k2, q] : forcing) p.noise.add({k1, k2}, q);
    }
    p.nonlinear = nonlinear;
    p.seed = seed;
    return p;
}

StationaryOptions RunConfig::stationary_options() const {
    StationaryOptions o;
    o.burn_in = burn_in;
    o.n_batches = n_batches;
    o.observe_every = observe_every;
    o.workers = workers;
    return o;
}

SweepConfig RunConfig::sweep_config() const {
    SweepConfig s;
    s.nu_ladder = nu_ladder;
    s.include_euler = include_euler;
    s.replicas = resolved_replicas();
    s.total_time = total_time;
    s.base = sim_params();
    s.dissipation_threshold = dissipation_threshold;
    s.convergence_tolerance = convergence_tolerance;
    s.options = stationary_options();
    return s;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
    s = trim(s);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(v)) return std::nullopt;
    }
    return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t j = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > j) out.push_back(s.substr(j, i - j));
    }
    return out;
}

// Where a value came from, for error messages.
struct Origin {
    int line = 0;
    std::string flag;

    ConfigError error(const std::string& message) const {
        return ConfigError(line, flag.empty() ? message : flag + ": " + message);
    }
};

class Parser {
public:
    Parser() {
        real("nu", [](RunConfig& c, double v) { c.nu = v; });
        real("gamma", [](RunConfig& c, double v) { c.gamma = v; });
        integer("K", [](RunConfig& c, std::uint64_t v) { c.K = static_cast<int>(std::min<std::uint64_t>(v, 1u << 20)); });
        integer("N", [](RunConfig& c, std::uint64_t v) { c.N = static_cast<int>(std::min<std::uint64_t>(v, 1u << 20)); });
        real("h", [](RunConfig& c, double v) { c.h = v; });
        integer("seed", [](RunConfig& c, std::uint64_t v) { c.seed = v; });
        boolean("nonlinear", [](RunConfig& c, bool v) { c.nonlinear = v; });
        integer("steps", [](RunConfig& c, std::uint64_t v) { c.steps = v; });
        real("total_time", [](RunConfig& c, double v) { c.total_time = v; });
        real("burn_in", [](RunConfig& c, double v) { c.burn_in = v; });
        integer("replicas", [](RunConfig& c, std::uint64_t v) { c.replicas = v; });
        integer("n_batches", [](RunConfig& c, std::uint64_t v) { c.n_batches = v; });
        integer("observe_every", [](RunConfig& c, std::uint64_t v) { c.observe_every = v; });
        integer("workers", [](RunConfig& c, std::uint64_t v) {
            c.workers = static_cast<unsigned>(std::min<std::uint64_t>(v, 4096));
        });
        boolean("include_euler", [](RunConfig& c, bool v) { c.include_euler = v; });
        real("dissipation_threshold", [](RunConfig& c, double v) { c.dissipation_threshold = v; });
        real("convergence_tolerance", [](RunConfig& c, double v) { c.convergence_tolerance = v; });
        setters_["nu_ladder"] = [](RunConfig& c, std::string_view v) {
            std::vector<double> ladder;
            std::size_t pos = 0;
            while (pos <= v.size()) {
                const auto comma = std::min(v.find(',', pos), v.size());
                const auto x = parse_number<double>(v.substr(pos, comma - pos));
                if (!x) return false;
                ladder.push_back(*x);
                pos = comma + 1;
            }
            c.nu_ladder = std::move(ladder);
            return true;
        };
        setters_["output_dir"] = [](RunConfig& c, std::string_view v) {
            if (v.empty()) return false;
            c.output_dir = std::string(v);
            return true;
        };
        setters_["mode"] = [](RunConfig& c, std::string_view v) {
            const auto m = parse_mode(v);
            if (!m) return false;
            c.mode = *m;
            return true;
        };
    }

    void assign(RunConfig& cfg, std::string_view key, std::string_view value, const Origin& origin, bool allow_repeat) {
        const auto it = setters_.find(std::string(key));
        if (it == setters_.end()) throw origin.error("unknown key '" + std::string(key) + "'");
        if (!allow_repeat && origins_.count(it->first)) {
            throw origin.error("key '" + std::string(key) + "' given twice");
        }
        if (!it->second(cfg, value)) {
            throw origin.error("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
        }
        origins_[it->first] = origin;
    }

    bool has(const std::string& key) const { return origins_.count(key) > 0; }
    Origin origin(const std::string& key) const {
        const auto it = origins_.find(key);
        return it == origins_.end() ? Origin{} : it->second;
    }

private:
    using Setter = std::function<bool(RunConfig&, std::string_view)>;

    void real(const char* key, void (*set)(RunConfig&, double)) {
        setters_[key] = [set](RunConfig& c, std::string_view v) {
            const auto x = parse_number<double>(v);
            if (x) set(c, *x);
            return x.has_value();
        };
    }
    void integer(const char* key, void (*set)(RunConfig&, std::uint64_t)) {
        setters_[key] = [set](RunConfig& c, std::string_view v) {
            const auto x = parse_number<std::uint64_t>(v);
            if (x) set(c, *x);
            return x.has_value();
        };
    }
    void boolean(const char* key, void (*set)(RunConfig&, bool)) {
        setters_[key] = [set](RunConfig& c, std::string_view v) {
            if (v == "true" || v == "1") set(c, true);
            else if (v == "false" || v == "0") set(c, false);
            else return false;
            return true;
        };
    }

    std::map<std::string, Setter> setters_;
    std::map<std::string, Origin> origins_;
};

void validate(const RunConfig& c, const Parser& p, const std::vector<int>& force_lines) {
    auto fail = [&](const std::string& key, const std::string& msg) { throw p.origin(key).error(msg); };

    const bool needs_physics = c.mode == Mode::simulate || c.mode == Mode::spectrum;
    if (needs_physics && !c.nu) throw ConfigError(0, std::string("missing required key 'nu' for ") + mode_name(c.mode));
    if (needs_physics && !c.gamma) {
        throw ConfigError(0, std::string("missing required key 'gamma' for ") + mode_name(c.mode));
    }
    if (c.gamma && !(*c.gamma > 0.0)) fail("gamma", "gamma must be > 0 (the damping gamma > 0 is required)");
    if (c.nu && !(*c.nu >= 0.0)) fail("nu", "nu must be >= 0");
    if (c.K < 2) fail("K", "K must be >= 2");
    if (!(c.h > 0.0)) fail("h", "h must be > 0");
    if (c.N != 0) {
        try {
            TruncationSpec(c.K, c.N, (2 * c.K) / 3);
        } catch (const std::invalid_argument& e) {
            fail("N", e.what());
        }
    }
    if (!(c.total_time > 0.0)) fail("total_time", "total_time must be > 0");
    if (!(c.burn_in >= 0.0)) fail("burn_in", "burn_in must be >= 0");
    if (c.n_batches < 1) fail("n_batches", "n_batches must be >= 1");
    if (c.observe_every < 1) fail("observe_every", "observe_every must be >= 1");
    if (!(c.dissipation_threshold > 0.0)) fail("dissipation_threshold", "dissipation_threshold must be > 0");
    if (!(c.convergence_tolerance > 0.0)) fail("convergence_tolerance", "convergence_tolerance must be > 0");
    for (std::size_t i = 0; i < c.nu_ladder.size(); ++i) {
        if (!(c.nu_ladder[i] > 0.0)) fail("nu_ladder", "ladder viscosities must be > 0");
        if (i > 0 && !(c.nu_ladder[i] < c.nu_ladder[i - 1])) fail("nu_ladder", "nu_ladder must be strictly decreasing");
    }

    const TruncationSpec trunc = c.N > 0 ? TruncationSpec(c.K, c.N, (2 * c.K) / 3) : TruncationSpec(c.K);
    NoiseSpec noise(trunc);
    for (std::size_t i = 0; i < c.forcing.size(); ++i) {
        const auto& [k1, k2, q] = c.forcing[i];
        try {
            noise.add({k1, k2}, q);
        } catch (const std::invalid_argument& e) {
            std::string msg = e.what();
            if (k1 == 0 && k2 == 0) msg = "force 0 0: the (0,0) mode is excluded, velocity fields have vanishing mean";
            throw ConfigError(force_lines[i], msg);
        }
    }
    if (c.mode == Mode::sweep) {
        try {
            c.sweep_config().validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(0, e.what());
        }
    }
}

}  // namespace

RunConfig parse_config(std::string_view text, std::optional<Mode> mode,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig cfg;
    Parser parser;
    std::vector<int> force_lines;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const Origin origin{line_no, {}};
        const auto tokens = split_ws(line);
        if (tokens[0] == "force") {
            if (tokens.size() != 4) throw origin.error("expected 'force k1 k2 q'");
            const auto k1 = parse_number<int>(tokens[1]);
            const auto k2 = parse_number<int>(tokens[2]);
            const auto q = parse_number<double>(tokens[3]);
            if (!k1 || !k2 || !q) throw origin.error("expected 'force k1 k2 q' with integer k and real q");
            if (*k1 == 0 && *k2 == 0) {
                throw origin.error("force 0 0: the (0,0) mode is excluded, velocity fields have vanishing mean");
            }
            cfg.forcing.emplace_back(*k1, *k2, *q);
            force_lines.push_back(line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw origin.error("expected 'key = value'");
        parser.assign(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), origin, false);
    }
    for (const auto& [key, value] : overrides) {
        parser.assign(cfg, key, trim(value), Origin{0, "--" + key}, true);
    }
    if (mode) cfg.mode = *mode;
    validate(cfg, parser, force_lines);
    return cfg;
}

std::string emit_config(const RunConfig& c) {
    std::ostringstream os;
    auto kv = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    kv("mode", mode_name(c.mode));
    if (c.nu) kv("nu", format_double(*c.nu));
    if (c.gamma) kv("gamma", format_double(*c.gamma));
    kv("K", std::to_string(c.K));
    kv("N", std::to_string(c.N));
    kv("h", format_double(c.h));
    kv("seed", std::to_string(c.seed));
    kv("nonlinear", b(c.nonlinear));
    kv("steps", std::to_string(c.steps));
    kv("total_time", format_double(c.total_time));
    kv("burn_in", format_double(c.burn_in));
    kv("replicas", std::to_string(c.replicas));
    kv("n_batches", std::to_string(c.n_batches));
    kv("observe_every", std::to_string(c.observe_every));
    kv("workers", std::to_string(c.workers));
    std::string ladder;
    for (std::size_t i = 0; i < c.nu_ladder.size(); ++i) ladder += (i ? "," : "") + format_double(c.nu_ladder[i]);
    kv("nu_ladder", ladder);
    kv("include_euler", b(c.include_euler));
    kv("dissipation_threshold", format_double(c.dissipation_threshold));
    kv("convergence_tolerance", format_double(c.convergence_tolerance));
    kv("output_dir", c.output_dir);
    for (const auto& [k1, k2, q] : c.forcing) os << "force " << k1 << ' ' << k2 << ' ' << format_double(q) << '\n';
    return os.str();
}

}  // namespace sdns
