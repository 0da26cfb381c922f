#ifndef EDM_MODEL_HPP
#define EDM_MODEL_HPP

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace edm {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// ConfigError -> 2, NumericError -> 3, PhaseError -> 4, TruncationError -> 5.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PhaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physical constants of the extended Dicke model, hbar = 1, all dimensionless.
// One photon mode (frequency omega) coupled with strength g to a superspin of
// length s (N = 2s two-level systems, Zeeman splitting e_z), plus a dipole-dipole
// S_y^2 term weighted by eps. kappa1/kappa2 are the bare photon/spin damping rates.
struct ModelParams {
    double omega = 1.0;
    double e_z = 0.2;
    double g = 0.46;
    double eps = -1.0;
    double s = 1.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;

    double n() const { return 2.0 * s; }

    void validate() const {
        if (!(omega > 0.0)) throw ConfigError("model: omega must be > 0");
        if (!(e_z > 0.0)) throw ConfigError("model: e_z must be > 0");
        if (!(s > 0.0)) throw ConfigError("model: s must be > 0");
        if (kappa1 < 0.0 || kappa2 < 0.0) throw ConfigError("model: damping rates must be >= 0");
    }
};

// Semiclassical phase-space point: photon quadratures plus the spin vector.
// |S| is conserved only by the unitary flow; dissipators may change it.
struct State {
    double q = 0.0;
    double p = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    double sz = 0.0;

    static constexpr int dim = 5;

    std::array<double, 5> to_array() const { return {q, p, sx, sy, sz}; }
    static State from_array(const std::array<double, 5>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }

    double inf_norm() const {
        double m = std::fabs(q);
        m = std::max(m, std::fabs(p));
        m = std::max(m, std::fabs(sx));
        m = std::max(m, std::fabs(sy));
        m = std::max(m, std::fabs(sz));
        return m;
    }
    bool is_finite() const {
        return std::isfinite(q) && std::isfinite(p) && std::isfinite(sx) &&
               std::isfinite(sy) && std::isfinite(sz);
    }
    double spin_norm2() const { return sx * sx + sy * sy + sz * sz; }
};

inline State operator+(const State& a, const State& b) {
    return {a.q + b.q, a.p + b.p, a.sx + b.sx, a.sy + b.sy, a.sz + b.sz};
}
inline State operator-(const State& a, const State& b) {
    return {a.q - b.q, a.p - b.p, a.sx - b.sx, a.sy - b.sy, a.sz - b.sz};
}
inline State operator*(double c, const State& a) {
    return {c * a.q, c * a.p, c * a.sx, c * a.sy, c * a.sz};
}

// One of the two degenerate symmetry-broken minima (branch = +1 or -1 picks
// the sign of S_y). theta is the polar rotation angle, cos(theta) = sz_sr / s.
struct SRMinimum {
    double theta = 0.0;
    double sy_sr = 0.0;
    double sz_sr = 0.0;
    double p_sr = 0.0;
    double energy = 0.0;
    int branch = +1;

    State state() const { return {0.0, p_sr, 0.0, sy_sr, sz_sr}; }
};

enum class Phase { Normal, Superradiant };

inline double energy(const State& st, const ModelParams& mp) {
    return 0.5 * (st.p * st.p + mp.omega * mp.omega * st.q * st.q) + mp.g * st.p * st.sy -
           mp.e_z * st.sz + (1.0 + mp.eps) * 0.5 * mp.g * mp.g * st.sy * st.sy;
}

inline std::pair<State, double> normal_minimum(const ModelParams& mp) {
    State st{0.0, 0.0, 0.0, 0.0, mp.s};
    return {st, -mp.e_z * mp.s};
}

inline double critical_coupling_undamped(const ModelParams& mp) {
    if (mp.eps >= 0.0)
        throw PhaseError("critical coupling defined only for eps < 0");
    return std::sqrt(-mp.e_z / (mp.eps * mp.s));
}

// Symmetry-broken branch exists for eps < 0 and g strictly above threshold;
// g == g_c is treated as normal (zero-amplitude branch).
inline Phase classify_phase(const ModelParams& mp) {
    if (mp.eps >= 0.0) return Phase::Normal;
    return mp.g > critical_coupling_undamped(mp) ? Phase::Superradiant : Phase::Normal;
}

inline std::optional<std::pair<SRMinimum, SRMinimum>> superradiant_minima(const ModelParams& mp) {
    if (classify_phase(mp) != Phase::Superradiant) return std::nullopt;
    const double sz = -mp.e_z / (mp.eps * mp.g * mp.g);
    const double sy = std::sqrt(mp.s * mp.s - sz * sz);
    const double e_sr = -mp.e_z * sz + 0.5 * mp.eps * mp.g * mp.g * (mp.s * mp.s - sz * sz);
    SRMinimum plus;
    plus.theta = std::atan2(sy, sz);
    plus.sy_sr = sy;
    plus.sz_sr = sz;
    plus.p_sr = -mp.g * sy;
    plus.energy = e_sr;
    plus.branch = +1;
    SRMinimum minus = plus;
    minus.theta = std::atan2(-sy, sz);
    minus.sy_sr = -sy;
    minus.p_sr = mp.g * sy;
    minus.branch = -1;
    return std::make_pair(plus, minus);
}

inline SRMinimum superradiant_minimum(const ModelParams& mp, int branch) {
    auto mm = superradiant_minima(mp);
    if (!mm) throw PhaseError("no superradiant minimum in the normal phase");
    return branch >= 0 ? mm->first : mm->second;
}

} // namespace edm

#endif
