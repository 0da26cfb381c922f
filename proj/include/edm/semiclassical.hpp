#ifndef EDM_SEMICLASSICAL_HPP
#define EDM_SEMICLASSICAL_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "edm/diag.hpp"
#include "edm/model.hpp"

namespace edm {

enum class DissipatorKind { Unitary, Bare, AdHocRotated, Dressed };

inline State unitary_rhs(const State& st, const ModelParams& mp) {
    const double g2 = mp.g * mp.g;
    State d;
    d.q = st.p + mp.g * st.sy;
    d.p = -mp.omega * mp.omega * st.q;
    d.sx = mp.g * st.p * st.sz + mp.e_z * st.sy + (1.0 + mp.eps) * g2 * st.sy * st.sz;
    d.sy = -mp.e_z * st.sx;
    d.sz = -mp.g * st.p * st.sx - (1.0 + mp.eps) * g2 * st.sx * st.sy;
    return d;
}

// Damping built from the bare photon/spin lowering operators. The spin rows
// pull toward the fully polarized pole, not toward the broken minimum.
inline State bare_rhs(const State& st, const ModelParams& mp) {
    State d = unitary_rhs(st, mp);
    d.q += -mp.kappa1 * st.q;
    d.p += -mp.kappa1 * st.p;
    d.sx += -mp.kappa2 * st.sx;
    d.sy += -mp.kappa2 * st.sy;
    d.sz += mp.kappa2 * (2.0 * mp.s - 2.0 * st.sz);
    return d;
}

// Damping from lowering operators shifted by p0 and rotated by theta so the
// chosen minimum becomes the attractor. Linear in the state.
inline State adhoc_rotated_rhs(const State& st, const ModelParams& mp, const SRMinimum& sr) {
    const double ct = std::cos(sr.theta);
    const double stt = std::sin(sr.theta);
    State d = unitary_rhs(st, mp);
    d.q += mp.kappa1 * (-st.q);
    d.p += mp.kappa1 * (-(st.p - sr.p_sr));
    d.sx += mp.kappa2 * (-st.sx);
    d.sy += mp.kappa2 *
            (2.0 * mp.s * stt - (1.0 + stt * stt) * st.sy - stt * ct * st.sz);
    d.sz += mp.kappa2 *
            (2.0 * mp.s * ct - stt * ct * st.sy - (1.0 + ct * ct) * st.sz);
    return d;
}

inline State adhoc_rotated_rhs(const State& st, const ModelParams& mp) {
    return adhoc_rotated_rhs(st, mp, superradiant_minimum(mp, +1));
}

// Damping from the two polariton channels, weighted by the effective
// viscosities. Channel rows act on the shifted/rotated variables and are
// rotated back; the quadratic J_z row feeds back into sy/sz.
inline State dressed_rhs(const State& st, const ModelParams& mp, const DiagonalizationResult& dg,
                         const DressedCoefficients& dc, std::pair<double, double> kappa_eff) {
    const double ct = std::cos(dg.theta);
    const double stt = std::sin(dg.theta);
    const double qt = st.q;
    const double pt = st.p - dg.p0;
    const double jx = st.sx;
    const double jy = st.sy * ct - st.sz * stt;
    const double jz = st.sy * stt + st.sz * ct;

    State d = unitary_rhs(st, mp);
    auto add_channel = [&](double k, double a, double b, double c, double dd, double e,
                           double f) {
        if (k == 0.0) return;
        const double dq = -a * qt + b * jx;
        const double dp = -a * pt + c * jy;
        const double djx = -dd * jx + e * qt;
        const double djy = -dd * jy + f * pt;
        const double djz = 2.0 * dd * (mp.s - jz) - c * qt * jx - b * pt * jy;
        d.q += k * dq;
        d.p += k * dp;
        d.sx += k * djx;
        d.sy += k * (ct * djy + stt * djz);
        d.sz += k * (-stt * djy + ct * djz);
    };
    add_channel(kappa_eff.first, dc.a1, dc.b1, dc.c1, dc.d1, dc.e1, dc.f1);
    add_channel(kappa_eff.second, dc.a2, dc.b2, dc.c2, dc.d2, dc.e2, dc.f2);
    return d;
}

inline State dressed_rhs(const State& st, const ModelParams& mp, const DiagonalizationResult& dg,
                         std::pair<double, double> kappa_eff) {
    return dressed_rhs(st, mp, dg, dressed_coefficients(dg, mp), kappa_eff);
}

// Critical values of the damped bare flow. Unlike the undamped transition
// they depend on kappa1/kappa2 through u and v.
inline std::pair<double, double> damped_critical_values(const ModelParams& mp) {
    const double u = 1.0 + mp.kappa1 * mp.kappa1 / (mp.omega * mp.omega);
    const double v = 1.0 + mp.kappa2 * mp.kappa2 / (mp.e_z * mp.e_z);
    const double denom = 1.0 - (1.0 + mp.eps) * u;
    if (denom <= 0.0)
        throw PhaseError("damped_critical_values: no transition for these parameters");
    const double gc = std::sqrt((2.0 * mp.e_z / mp.n()) * u * v / denom);
    const double eps_c = 1.0 / u - 1.0;
    return {gc, eps_c};
}

// Stationary points of the bare flow: the polarized pole always, plus the two
// symmetry-broken points when they exist. Every returned point has energy
// -e_z * s regardless of the damping rates.
inline std::vector<State> bare_fixed_points(const ModelParams& mp) {
    std::vector<State> pts;
    pts.push_back(State{0.0, 0.0, 0.0, 0.0, mp.s});
    const double u = 1.0 + mp.kappa1 * mp.kappa1 / (mp.omega * mp.omega);
    const double v = 1.0 + mp.kappa2 * mp.kappa2 / (mp.e_z * mp.e_z);
    const double denom = 1.0 - (1.0 + mp.eps) * u;
    if (denom <= 0.0) return pts;
    const double gc = std::sqrt((2.0 * mp.e_z / mp.n()) * u * v / denom);
    const double eps_c = 1.0 / u - 1.0;
    if (!(mp.eps <= eps_c && mp.g >= gc)) return pts;
    const double sz = (mp.e_z / (mp.g * mp.g)) * u * v / denom;
    const double sy2 = sz * (mp.n() - 2.0 * sz) / v;
    if (sy2 < 0.0) return pts;
    const double sy = std::sqrt(sy2);
    for (int sgn : {+1, -1}) {
        State st;
        st.sy = sgn * sy;
        st.sz = sz;
        st.sx = -(mp.kappa2 / mp.e_z) * st.sy;
        st.p = -(mp.g / u) * st.sy;
        st.q = -(mp.kappa1 / (mp.omega * mp.omega)) * st.p;
        pts.push_back(st);
    }
    return pts;
}

// Pedagogical single-oscillator model: H = (p - p0)^2/2 + omega^2 q^2/2 with
// damping built either from the bare lowering operator or the shifted one.
struct ShiftedHOParams {
    double omega = 1.0;
    double p0 = 0.0;
    double kappa = 0.0;
    bool shifted_dissipator = false;

    void validate() const {
        if (!(omega > 0.0)) throw ConfigError("shifted_ho: omega must be > 0");
        if (kappa < 0.0) throw ConfigError("shifted_ho: kappa must be >= 0");
    }
};

struct HOState {
    double q = 0.0;
    double p = 0.0;

    static constexpr int dim = 2;
    std::array<double, 2> to_array() const { return {q, p}; }
    static HOState from_array(const std::array<double, 2>& a) { return {a[0], a[1]}; }
    double inf_norm() const { return std::max(std::fabs(q), std::fabs(p)); }
    bool is_finite() const { return std::isfinite(q) && std::isfinite(p); }
};

inline HOState operator+(const HOState& a, const HOState& b) { return {a.q + b.q, a.p + b.p}; }
inline HOState operator-(const HOState& a, const HOState& b) { return {a.q - b.q, a.p - b.p}; }
inline HOState operator*(double c, const HOState& a) { return {c * a.q, c * a.p}; }

inline HOState shifted_ho_rhs(const HOState& st, const ShiftedHOParams& hp) {
    HOState d;
    d.q = st.p - hp.p0 - hp.kappa * st.q;
    d.p = hp.shifted_dissipator ? -hp.omega * hp.omega * st.q - hp.kappa * (st.p - hp.p0)
                                : -hp.omega * hp.omega * st.q - hp.kappa * st.p;
    return d;
}

inline HOState shifted_ho_fixed_point(const ShiftedHOParams& hp) {
    if (hp.shifted_dissipator || hp.kappa == 0.0) return {0.0, hp.p0};
    const double w2 = hp.omega * hp.omega;
    const double k2 = hp.kappa * hp.kappa;
    return {-hp.kappa * hp.p0 / (w2 + k2), hp.p0 / (1.0 + k2 / w2)};
}

inline double ho_energy(const HOState& st, const ShiftedHOParams& hp) {
    const double pm = st.p - hp.p0;
    return 0.5 * (pm * pm + hp.omega * hp.omega * st.q * st.q);
}

} // namespace edm

#endif
