#ifndef EDM_IO_HPP
#define EDM_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "edm/config.hpp"
#include "edm/diag.hpp"
#include "edm/dynamics.hpp"
#include "edm/model.hpp"

namespace edm {

using nlohmann::json;

// 17 significant digits: doubles survive a round trip through the text form.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string comment_block(const Config& cfg, const std::string& prefix = "# ") {
    std::istringstream is(cfg.dump());
    std::ostringstream os;
    std::string line;
    os << prefix << "resolved configuration\n";
    while (std::getline(is, line)) os << prefix << line << "\n";
    return os.str();
}

inline json config_to_json(const Config& cfg) {
    json j = json::object();
    for (const auto& [sec, kv] : cfg.sections()) {
        json s = json::object();
        for (const auto& [k, v] : kv) s[k] = v;
        j[sec] = std::move(s);
    }
    return j;
}

inline json state_to_json(const State& st) {
    return json{{"q", st.q}, {"p", st.p}, {"sx", st.sx}, {"sy", st.sy}, {"sz", st.sz}};
}

inline json model_to_json(const ModelParams& mp) {
    return json{{"omega", mp.omega},   {"e_z", mp.e_z},       {"g", mp.g},
                {"eps", mp.eps},       {"s", mp.s},           {"kappa1", mp.kappa1},
                {"kappa2", mp.kappa2}};
}

inline json diag_to_json(const DiagonalizationResult& d, const BogoliubovCoefficients& bc) {
    return json{{"theta", d.theta},
                {"chi", d.chi},
                {"F", d.f_cap},
                {"G", d.g_cap},
                {"K", d.k_cap},
                {"eps1", d.eps1},
                {"eps2", d.eps2},
                {"p0", d.p0},
                {"branch", d.branch},
                {"coefficients",
                 json{{"alpha1", bc.alpha1},
                      {"beta1", bc.beta1},
                      {"gamma1", bc.gamma1},
                      {"delta1", bc.delta1},
                      {"alpha2", bc.alpha2},
                      {"beta2", bc.beta2},
                      {"gamma2", bc.gamma2},
                      {"delta2", bc.delta2}}}};
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory<State>& traj,
                                 const ModelParams& mp, const Config& cfg) {
    os << comment_block(cfg);
    os << "t,q,p,sx,sy,sz,energy\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const State& st = traj.y[i];
        os << fmt17(traj.t[i]) << ',' << fmt17(st.q) << ',' << fmt17(st.p) << ','
           << fmt17(st.sx) << ',' << fmt17(st.sy) << ',' << fmt17(st.sz) << ','
           << fmt17(energy(st, mp)) << '\n';
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw ConfigError("cannot create output directory: " + path.parent_path().string());
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path.string());
    f << content;
    if (!f) throw ConfigError("write failed: " + path.string());
}

} // namespace edm

#endif
