#pragma once
// Run configuration: a small INI-style text format with typed accessors.
//
//   # model lives at top level
//   V = [0, 0, -0.5, 0, 0.25]
//   G = [0, 0, 0.5]
//   lambda = 0.3
//
//   [grid]
//   q_min = -6.0
//   ...
//
// Sections configure one command each ([pde], [particles], [stationary]);
// a command refuses to run when its section is missing.  Every numeric
// field is range-checked here, at parse time, with the offending
// "[section].key" named in the error.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vfp {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace detail

/// Raw parsed file: section -> key -> value string.  Typed access with
/// contextual errors; unknown keys are rejected by the callers that know
/// their schema.
class ConfigTable {
public:
    static ConfigTable parse(const std::string& text) {
        ConfigTable t;
        std::istringstream in(text);
        std::string line, section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": unterminated section header");
                section = detail::trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": empty section name");
                t.sections_[section];
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            auto& sec = t.sections_[section];
            if (sec.count(key))
                throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                                  key + "' in section [" + section + "]");
            sec[key] = value;
        }
        return t;
    }

    static ConfigTable load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }
    bool has(const std::string& s, const std::string& k) const {
        auto it = sections_.find(s);
        return it != sections_.end() && it->second.count(k) != 0;
    }

    std::string get_string(const std::string& s, const std::string& k) const {
        return raw(s, k);
    }
    std::string get_string(const std::string& s, const std::string& k,
                           const std::string& fallback) const {
        return has(s, k) ? raw(s, k) : fallback;
    }

    double get_double(const std::string& s, const std::string& k) const {
        return to_double(raw(s, k), where(s, k));
    }
    double get_double(const std::string& s, const std::string& k, double fallback) const {
        return has(s, k) ? get_double(s, k) : fallback;
    }

    std::uint64_t get_u64(const std::string& s, const std::string& k,
                          std::uint64_t fallback) const {
        if (!has(s, k)) return fallback;
        const double d = get_double(s, k);
        const auto u = static_cast<std::uint64_t>(d);
        if (d < 0.0 || static_cast<double>(u) != d)
            throw ConfigError(where(s, k) + ": expected a nonnegative integer, got '" +
                              raw(s, k) + "'");
        return u;
    }

    bool get_bool(const std::string& s, const std::string& k, bool fallback) const {
        if (!has(s, k)) return fallback;
        const std::string v = raw(s, k);
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        throw ConfigError(where(s, k) + ": expected true/false, got '" + v + "'");
    }

    std::vector<double> get_array(const std::string& s, const std::string& k) const {
        const std::string v = raw(s, k);
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            throw ConfigError(where(s, k) + ": expected [a, b, ...], got '" + v + "'");
        std::vector<double> out;
        std::string body = v.substr(1, v.size() - 2);
        std::size_t pos = 0;
        while (pos <= body.size()) {
            std::size_t comma = body.find(',', pos);
            if (comma == std::string::npos) comma = body.size();
            const std::string item = detail::trim(body.substr(pos, comma - pos));
            if (!item.empty()) out.push_back(to_double(item, where(s, k)));
            pos = comma + 1;
        }
        return out;
    }

private:
    std::string raw(const std::string& s, const std::string& k) const {
        auto it = sections_.find(s);
        if (it == sections_.end() || it->second.count(k) == 0)
            throw ConfigError("missing required config field " + where(s, k));
        return it->second.at(k);
    }
    static std::string where(const std::string& s, const std::string& k) {
        return s.empty() ? k : "[" + s + "]." + k;
    }
    static double to_double(const std::string& v, const std::string& ctx) {
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(v, &used);
        } catch (const std::exception&) {
            throw ConfigError(ctx + ": expected a number, got '" + v + "'");
        }
        if (used != v.size())
            throw ConfigError(ctx + ": trailing junk after number in '" + v + "'");
        return d;
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// ---------------------------------------------------------------------------
// typed run configuration
// ---------------------------------------------------------------------------

struct ModelConfig {
    std::vector<double> v_coeffs;
    std::vector<double> g_coeffs;  // empty: no interaction
    double lambda = 0.0;
};

struct GridConfig {
    double q_min = -6.0, q_max = 6.0;
    double p_min = -6.0, p_max = 6.0;
    std::size_t n_q = 256, n_p = 256;
};

struct InitConfig {
    enum class Kind { gaussian, two_point, density_file };
    Kind kind = Kind::gaussian;
    double mean_q = 0.0, sd_q = 1.0, mean_p = 0.0, sd_p = 1.0;
    double q_a = -1.0, q_b = 1.0, p0 = 0.0, weight_a = 0.5;
    std::string file;
};

struct PdeConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    std::size_t stride = 100;
    bool muscl = false;
    InitConfig init;
};

struct ParticlesConfig {
    std::size_t n = 10000;
    double dt = 1e-3;
    double t_end = 1.0;
    std::size_t stride = 100;
    std::uint64_t seed = 1;
    bool kde = false;
    InitConfig init;
};

struct StationaryConfig {
    double theta = 0.5;
    double tol = 1e-12;
    std::size_t max_iter = 5000;
    InitConfig init;  // starting point of the damped iteration
    double scan_lambda_lo = 0.0, scan_lambda_hi = 0.0;  // phase-scan window
    double scan_width_tol = 1e-3;
    double m_max = 4.0;
    double root_tol = 1e-10;
    double half_width = 12.0;
};

struct RunConfig {
    ModelConfig model;
    GridConfig grid;
    std::optional<PdeConfig> pde;
    std::optional<ParticlesConfig> particles;
    std::optional<StationaryConfig> stationary;
    std::string output_dir = ".";
};

namespace detail {

inline InitConfig parse_init(const ConfigTable& t, const std::string& sec) {
    InitConfig c;
    const std::string kind = t.get_string(sec, "init", "gaussian");
    if (kind == "gaussian")
        c.kind = InitConfig::Kind::gaussian;
    else if (kind == "two_point")
        c.kind = InitConfig::Kind::two_point;
    else if (kind == "density_file")
        c.kind = InitConfig::Kind::density_file;
    else
        throw ConfigError("[" + sec + "].init: unknown kind '" + kind +
                          "' (gaussian | two_point | density_file)");
    c.mean_q = t.get_double(sec, "init_mean_q", 0.0);
    c.sd_q = t.get_double(sec, "init_sd_q", 1.0);
    c.mean_p = t.get_double(sec, "init_mean_p", 0.0);
    c.sd_p = t.get_double(sec, "init_sd_p", 1.0);
    c.q_a = t.get_double(sec, "init_q_a", -1.0);
    c.q_b = t.get_double(sec, "init_q_b", 1.0);
    c.p0 = t.get_double(sec, "init_p0", 0.0);
    c.weight_a = t.get_double(sec, "init_weight_a", 0.5);
    if (c.kind == InitConfig::Kind::density_file) c.file = t.get_string(sec, "init_file");
    if (c.kind == InitConfig::Kind::gaussian && !(c.sd_q > 0.0 && c.sd_p > 0.0))
        throw ConfigError("[" + sec + "]: gaussian init needs positive init_sd_q / init_sd_p");
    return c;
}

}  // namespace detail

/// Build the typed configuration, validating every numeric field.
inline RunConfig make_run_config(const ConfigTable& t) {
    RunConfig c;
    if (!t.has("", "lambda")) throw ConfigError("missing required config field lambda");
    c.model.lambda = t.get_double("", "lambda");
    if (!(c.model.lambda > 0.0)) throw ConfigError("lambda: must be > 0");
    if (!t.has("", "V")) throw ConfigError("missing required config field V");
    c.model.v_coeffs = t.get_array("", "V");
    if (t.has("", "G")) c.model.g_coeffs = t.get_array("", "G");

    if (t.has_section("grid")) {
        c.grid.q_min = t.get_double("grid", "q_min", c.grid.q_min);
        c.grid.q_max = t.get_double("grid", "q_max", c.grid.q_max);
        c.grid.p_min = t.get_double("grid", "p_min", c.grid.p_min);
        c.grid.p_max = t.get_double("grid", "p_max", c.grid.p_max);
        c.grid.n_q = t.get_u64("grid", "n_q", c.grid.n_q);
        c.grid.n_p = t.get_u64("grid", "n_p", c.grid.n_p);
        if (!(c.grid.q_min < c.grid.q_max && c.grid.p_min < c.grid.p_max))
            throw ConfigError("[grid]: bounds must satisfy q_min < q_max and p_min < p_max");
        if (c.grid.n_q < 8 || c.grid.n_p < 8)
            throw ConfigError("[grid]: need at least 8 cells per axis");
    }

    if (t.has_section("pde")) {
        PdeConfig p;
        p.dt = t.get_double("pde", "dt", p.dt);
        p.t_end = t.get_double("pde", "t_end", p.t_end);
        p.stride = t.get_u64("pde", "stride", p.stride);
        const std::string scheme = t.get_string("pde", "transport", "upwind");
        if (scheme == "upwind")
            p.muscl = false;
        else if (scheme == "muscl")
            p.muscl = true;
        else
            throw ConfigError("[pde].transport: unknown scheme '" + scheme +
                              "' (upwind | muscl)");
        if (!(p.dt > 0.0)) throw ConfigError("[pde].dt: must be > 0");
        if (!(p.t_end >= 0.0)) throw ConfigError("[pde].t_end: must be >= 0");
        if (p.stride == 0) throw ConfigError("[pde].stride: must be >= 1");
        p.init = detail::parse_init(t, "pde");
        if (p.init.kind == InitConfig::Kind::two_point)
            throw ConfigError("[pde].init: two_point is a particle-only law");
        c.pde = p;
    }

    if (t.has_section("particles")) {
        ParticlesConfig p;
        p.n = t.get_u64("particles", "n", p.n);
        p.dt = t.get_double("particles", "dt", p.dt);
        p.t_end = t.get_double("particles", "t_end", p.t_end);
        p.stride = t.get_u64("particles", "stride", p.stride);
        p.seed = t.get_u64("particles", "seed", p.seed);
        p.kde = t.get_bool("particles", "kde", false);
        if (p.n < 2) throw ConfigError("[particles].n: need at least 2 particles");
        if (!(p.dt > 0.0)) throw ConfigError("[particles].dt: must be > 0");
        if (!(p.t_end >= 0.0)) throw ConfigError("[particles].t_end: must be >= 0");
        if (p.stride == 0) throw ConfigError("[particles].stride: must be >= 1");
        p.init = detail::parse_init(t, "particles");
        c.particles = p;
    }

    if (t.has_section("stationary")) {
        StationaryConfig s;
        s.theta = t.get_double("stationary", "theta", s.theta);
        s.tol = t.get_double("stationary", "tol", s.tol);
        s.max_iter = t.get_u64("stationary", "max_iter", s.max_iter);
        s.init = detail::parse_init(t, "stationary");
        s.scan_lambda_lo = t.get_double("stationary", "scan_lambda_lo", 0.0);
        s.scan_lambda_hi = t.get_double("stationary", "scan_lambda_hi", 0.0);
        s.scan_width_tol = t.get_double("stationary", "scan_width_tol", s.scan_width_tol);
        s.m_max = t.get_double("stationary", "m_max", s.m_max);
        s.root_tol = t.get_double("stationary", "root_tol", s.root_tol);
        s.half_width = t.get_double("stationary", "half_width", s.half_width);
        if (!(s.theta > 0.0 && s.theta <= 1.0))
            throw ConfigError("[stationary].theta: must be in (0, 1]");
        if (!(s.tol > 0.0)) throw ConfigError("[stationary].tol: must be > 0");
        if (s.max_iter == 0) throw ConfigError("[stationary].max_iter: must be >= 1");
        if (!(s.scan_width_tol > 0.0))
            throw ConfigError("[stationary].scan_width_tol: must be > 0");
        if (!(s.m_max > 0.0)) throw ConfigError("[stationary].m_max: must be > 0");
        if (!(s.root_tol > 0.0)) throw ConfigError("[stationary].root_tol: must be > 0");
        if (!(s.half_width > 0.0)) throw ConfigError("[stationary].half_width: must be > 0");
        c.stationary = s;
    }

    if (t.has_section("output")) c.output_dir = t.get_string("output", "dir", ".");
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    return make_run_config(ConfigTable::load(path));
}

}  // namespace vfp
