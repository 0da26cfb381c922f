#ifndef EDM_CONFIG_HPP
#define EDM_CONFIG_HPP

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "edm/diag.hpp"
#include "edm/dynamics.hpp"
#include "edm/model.hpp"
#include "edm/semiclassical.hpp"

namespace edm {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace detail

// Flat sectioned key-value text. Sections and keys are kept sorted so the
// resolved dump is canonical: identical inputs produce identical bytes.
class Config {
public:
    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream is(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']' || t.size() < 3)
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": malformed section header");
                section = detail::trim(t.substr(1, t.size() - 2));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": key outside any section");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string val = detail::trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) +
                                               ": empty key");
            cfg.data_[section][key] = val;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file: " + path);
        std::ostringstream os;
        os << f.rdbuf();
        return parse_string(os.str(), path);
    }

    bool has(const std::string& sec, const std::string& key) const {
        const auto s = data_.find(sec);
        return s != data_.end() && s->second.count(key) > 0;
    }

    const std::string& get(const std::string& sec, const std::string& key) const {
        const auto s = data_.find(sec);
        if (s != data_.end()) {
            const auto k = s->second.find(key);
            if (k != s->second.end()) return k->second;
        }
        throw ConfigError("missing config key [" + sec + "] " + key);
    }

    double get_double(const std::string& sec, const std::string& key) const {
        const std::string& v = get(sec, key);
        errno = 0;
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
            throw ConfigError("config key [" + sec + "] " + key + ": not a number: '" + v + "'");
        return x;
    }

    long get_int(const std::string& sec, const std::string& key) const {
        const std::string& v = get(sec, key);
        errno = 0;
        char* end = nullptr;
        const long x = std::strtol(v.c_str(), &end, 10);
        if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
            throw ConfigError("config key [" + sec + "] " + key + ": not an integer: '" + v +
                              "'");
        return x;
    }

    bool get_bool(const std::string& sec, const std::string& key) const {
        const std::string& v = get(sec, key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError("config key [" + sec + "] " + key + ": not a boolean: '" + v + "'");
    }

    void set(const std::string& sec, const std::string& key, const std::string& val) {
        data_[sec][key] = val;
    }

    void merge(const Config& overlay) {
        for (const auto& [sec, kv] : overlay.data_)
            for (const auto& [k, v] : kv) data_[sec][k] = v;
    }

    std::string dump() const {
        std::ostringstream os;
        bool first = true;
        for (const auto& [sec, kv] : data_) {
            if (!first) os << "\n";
            first = false;
            os << "[" << sec << "]\n";
            for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
        }
        return os.str();
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return data_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

// Every key referenced anywhere gets a default here, so a resolved config is
// always complete and its dump is a full provenance record.
inline Config default_config() {
    Config c;
    c.set("model", "omega", "1.0");
    c.set("model", "e_z", "0.2");
    c.set("model", "g", "0.46");
    c.set("model", "eps", "-1.0");
    c.set("model", "s", "1.0");
    c.set("model", "kappa1", "0.02");
    c.set("model", "kappa2", "0.02");

    c.set("run", "dissipator", "bare");
    c.set("run", "branch", "+1");
    c.set("run", "initial", "minimum+noise");
    c.set("run", "sigma", "0.001");
    c.set("run", "seed", "20216");
    c.set("run", "convergence_eps", "1e-4");
    c.set("run", "q", "0.0");
    c.set("run", "p", "0.0");
    c.set("run", "sx", "0.0");
    c.set("run", "sy", "0.0");
    c.set("run", "sz", "1.0");

    c.set("solver", "method", "rk45");
    c.set("solver", "dt", "0.001");
    c.set("solver", "rtol", "1e-9");
    c.set("solver", "atol", "1e-12");
    c.set("solver", "t_end", "0");  // 0: use 50 / min(kappa1, kappa2)
    c.set("solver", "record_stride", "10");

    c.set("bath_a", "kind", "ohmic");
    c.set("bath_a", "eta", "0.02");
    c.set("bath_a", "nu_c", "10.0");
    c.set("bath_a", "temperature", "0.0");
    c.set("bath_s", "kind", "ohmic");
    c.set("bath_s", "eta", "0.02");
    c.set("bath_s", "nu_c", "10.0");
    c.set("bath_s", "temperature", "0.0");

    c.set("oracle", "n_c", "8");
    c.set("oracle", "n_b", "8");
    c.set("oracle", "guard", "1e-4");
    c.set("oracle", "channels", "dressed");  // dressed | bare
    c.set("oracle", "bare_rate", "0.1");
    c.set("oracle", "temperature", "0.0");
    c.set("oracle", "t_end", "40.0");
    c.set("oracle", "dt", "0");  // 0: use 0.01 / max(eps1, eps2, rates)
    c.set("oracle", "record_every", "100");

    c.set("sweep", "g_min", "0.10");
    c.set("sweep", "g_max", "0.80");
    c.set("sweep", "g_steps", "15");
    c.set("sweep", "eps_min", "-1.5");
    c.set("sweep", "eps_max", "0.5");
    c.set("sweep", "eps_steps", "9");
    c.set("sweep", "threads", "0");  // 0: hardware concurrency
    return c;
}

inline std::optional<std::string> preset_text(const std::string& name) {
    if (name == "fig2")
        return std::string(
            "# Bare dissipators at the near-critical point: the flow leaves the broken\n"
            "# minimum and settles on the polarized-energy fixed point.\n"
            "[model]\n"
            "omega = 1.0\ne_z = 0.2\ng = 0.46\neps = -1.0\ns = 1.0\n"
            "kappa1 = 0.02\nkappa2 = 0.02\n\n"
            "[run]\ndissipator = bare\nbranch = +1\ninitial = minimum+noise\n"
            "sigma = 0.001\nseed = 20216\n\n"
            "[solver]\nmethod = rk45\nt_end = 2500\nrecord_stride = 10\n");
    if (name == "fig3")
        return std::string(
            "# Shifted/rotated dissipators at the same point: the flow relaxes back\n"
            "# into the broken minimum.\n"
            "[model]\n"
            "omega = 1.0\ne_z = 0.2\ng = 0.46\neps = -1.0\ns = 1.0\n"
            "kappa1 = 0.02\nkappa2 = 0.02\n\n"
            "[run]\ndissipator = adhoc\nbranch = +1\ninitial = minimum+noise\n"
            "sigma = 0.001\nseed = 20216\n\n"
            "[solver]\nmethod = rk45\nt_end = 2500\nrecord_stride = 10\n");
    if (name == "dressed")
        return std::string(
            "# Polariton-channel dissipators with flat baths; relaxes into the broken\n"
            "# minimum like the ad-hoc construction but with microscopic rates.\n"
            "[model]\n"
            "omega = 1.0\ne_z = 0.2\ng = 0.46\neps = -1.0\ns = 1.0\n"
            "kappa1 = 0.02\nkappa2 = 0.02\n\n"
            "[run]\ndissipator = dressed\nbranch = +1\ninitial = minimum+noise\n"
            "sigma = 0.001\nseed = 20216\n\n"
            "[bath_a]\nkind = flat\neta = 0.02\ntemperature = 0.0\n\n"
            "[bath_s]\nkind = flat\neta = 0.02\ntemperature = 0.0\n\n"
            "[solver]\nmethod = rk45\nt_end = 3000\nrecord_stride = 10\n");
    if (name == "oracle")
        return std::string(
            "# Truncated two-mode quantum run, deep in the broken phase so the kept\n"
            "# Fock ladder holds the squeezed ground state with headroom.\n"
            "[model]\n"
            "omega = 1.0\ne_z = 0.2\ng = 1.0\neps = -1.0\ns = 1.0\n"
            "kappa1 = 0.02\nkappa2 = 0.02\n\n"
            "[run]\nbranch = +1\n\n"
            "[bath_a]\nkind = flat\neta = 0.1\ntemperature = 0.0\n\n"
            "[bath_s]\nkind = flat\neta = 0.1\ntemperature = 0.0\n\n"
            "[oracle]\nn_c = 8\nn_b = 8\nchannels = dressed\nt_end = 40.0\n");
    return std::nullopt;
}

enum class InitialKind { MinimumPlusNoise, Explicit };

struct RunConfig {
    ModelParams params;
    DissipatorKind dissipator = DissipatorKind::Bare;
    int branch = +1;
    InitialKind initial = InitialKind::MinimumPlusNoise;
    double sigma = 1e-3;
    State explicit_state;
    SolverConfig solver;
    BathSpec bath_a;
    BathSpec bath_s;
    unsigned long seed = 0;
};

inline BathSpec bath_from_config(const Config& c, const std::string& sec) {
    const std::string kind = c.get(sec, "kind");
    const double temperature = c.get_double(sec, "temperature");
    if (kind == "none") return zero_bath();
    if (kind == "flat") return flat_bath(c.get_double(sec, "eta"), temperature, sec + ":flat");
    if (kind == "ohmic")
        return ohmic_bath(c.get_double(sec, "eta"), c.get_double(sec, "nu_c"), temperature,
                          sec + ":ohmic");
    throw ConfigError("config key [" + sec + "] kind: unknown bath kind '" + kind + "'");
}

inline RunConfig run_from_config(const Config& c) {
    RunConfig rc;
    rc.params.omega = c.get_double("model", "omega");
    rc.params.e_z = c.get_double("model", "e_z");
    rc.params.g = c.get_double("model", "g");
    rc.params.eps = c.get_double("model", "eps");
    rc.params.s = c.get_double("model", "s");
    rc.params.kappa1 = c.get_double("model", "kappa1");
    rc.params.kappa2 = c.get_double("model", "kappa2");
    rc.params.validate();

    const std::string dk = c.get("run", "dissipator");
    if (dk == "unitary") rc.dissipator = DissipatorKind::Unitary;
    else if (dk == "bare") rc.dissipator = DissipatorKind::Bare;
    else if (dk == "adhoc") rc.dissipator = DissipatorKind::AdHocRotated;
    else if (dk == "dressed") rc.dissipator = DissipatorKind::Dressed;
    else throw ConfigError("config key [run] dissipator: unknown kind '" + dk + "'");

    rc.branch = static_cast<int>(c.get_int("run", "branch"));
    if (rc.branch != 1 && rc.branch != -1)
        throw ConfigError("config key [run] branch: must be +1 or -1");

    const std::string init = c.get("run", "initial");
    if (init == "minimum+noise") rc.initial = InitialKind::MinimumPlusNoise;
    else if (init == "state") rc.initial = InitialKind::Explicit;
    else throw ConfigError("config key [run] initial: unknown kind '" + init + "'");
    rc.sigma = c.get_double("run", "sigma");
    if (rc.sigma < 0.0) throw ConfigError("config key [run] sigma: must be >= 0");
    rc.explicit_state = State{c.get_double("run", "q"), c.get_double("run", "p"),
                              c.get_double("run", "sx"), c.get_double("run", "sy"),
                              c.get_double("run", "sz")};
    rc.seed = static_cast<unsigned long>(c.get_int("run", "seed"));

    const std::string method = c.get("solver", "method");
    if (method == "rk45") rc.solver.method = SolverMethod::RK45Adaptive;
    else if (method == "rk4") rc.solver.method = SolverMethod::RK4Fixed;
    else throw ConfigError("config key [solver] method: unknown method '" + method + "'");
    rc.solver.dt = c.get_double("solver", "dt");
    rc.solver.rtol = c.get_double("solver", "rtol");
    rc.solver.atol = c.get_double("solver", "atol");
    rc.solver.record_stride = static_cast<int>(c.get_int("solver", "record_stride"));
    double t_end = c.get_double("solver", "t_end");
    if (t_end == 0.0) {
        const double kmin = std::min(rc.params.kappa1, rc.params.kappa2);
        t_end = kmin > 0.0 ? 50.0 / kmin : 100.0;
    }
    rc.solver.t_end = t_end;
    rc.solver.validate();

    rc.bath_a = bath_from_config(c, "bath_a");
    rc.bath_s = bath_from_config(c, "bath_s");
    return rc;
}

// Phase-appropriate minimum: the broken one on the requested branch when it
// exists, otherwise the polarized one.
inline State reference_minimum(const ModelParams& mp, int branch) {
    if (classify_phase(mp) == Phase::Superradiant)
        return superradiant_minimum(mp, branch).state();
    return normal_minimum(mp).first;
}

inline State make_initial_state(const RunConfig& rc, std::mt19937_64& rng) {
    if (rc.initial == InitialKind::Explicit) return rc.explicit_state;
    State st = reference_minimum(rc.params, rc.branch);
    std::normal_distribution<double> noise(0.0, rc.sigma);
    if (rc.sigma > 0.0) {
        st.q += noise(rng);
        st.p += noise(rng);
        st.sx += noise(rng);
        st.sy += noise(rng);
        st.sz += noise(rng);
    }
    return st;
}

} // namespace edm

#endif
