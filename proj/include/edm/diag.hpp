#ifndef EDM_DIAG_HPP
#define EDM_DIAG_HPP

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "edm/model.hpp"

namespace edm {

// Diagonalization of the quadratic expansion about a superradiant minimum:
// shift the photon by p0, rotate the spin frame by theta, bosonize the spin,
// then mix photon and spin bosons by the angle chi. eps1/eps2 are the two
// polariton energies (channel labels keep the -/+ discriminant signs rather
// than sorted order). f_cap = e_z/cos(theta), g_cap is the constant energy
// shift, k_cap = (1+eps) g^2 / 2.
struct DiagonalizationResult {
    double theta = 0.0;
    double chi = 0.0;
    double f_cap = 0.0;
    double g_cap = 0.0;
    double k_cap = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double p0 = 0.0;
    int branch = +1;
};

inline DiagonalizationResult diagonalize(const ModelParams& mp, int branch = +1) {
    if (classify_phase(mp) != Phase::Superradiant)
        throw PhaseError("diagonalize: system is in the normal phase");
    const SRMinimum sr = superradiant_minimum(mp, branch);
    const double ct = std::cos(sr.theta);
    const double st = std::sin(sr.theta);
    const double w2 = mp.omega * mp.omega;

    DiagonalizationResult d;
    d.theta = sr.theta;
    d.f_cap = mp.e_z / ct;
    d.g_cap = -0.5 * mp.e_z * mp.s * (1.0 + ct * ct) / ct;
    d.k_cap = 0.5 * (1.0 + mp.eps) * mp.g * mp.g;
    d.p0 = sr.p_sr;
    d.branch = sr.branch;

    // Spin-mode frequency^2 and the p-p cross coupling of the quadratic form.
    const double fbar2 = d.f_cap * mp.g * mp.g * mp.s * (ct * ct - mp.eps * st * st);
    const double gam = mp.omega * mp.e_z / std::sqrt(-mp.eps);
    // 2chi in (0, pi): keeps sin(2chi) > 0, so both channel energies stay real
    // in the stable phase.
    const double two_chi = std::atan2(2.0 * gam, fbar2 - w2);
    d.chi = 0.5 * two_chi;
    const double r = std::hypot(fbar2 - w2, 2.0 * gam);
    const double e1sq = 0.5 * (w2 + fbar2 - r);
    const double e2sq = 0.5 * (w2 + fbar2 + r);
    if (e1sq <= 0.0 || e2sq <= 0.0)
        throw NumericError("diagonalize: non-positive polariton energy (unstable expansion)");
    d.eps1 = std::sqrt(e1sq);
    d.eps2 = std::sqrt(e2sq);
    return d;
}

// Cross-check route for the polariton energies, evaluated from F, K and the
// chi already stored in diag: eps^2 = omega^2 + Gamma (cos 2chi -/+ 1)/sin 2chi.
inline std::pair<double, double> energies_full(const ModelParams& mp,
                                               const DiagonalizationResult& d) {
    if (classify_phase(mp) != Phase::Superradiant)
        throw PhaseError("energies_full: system is in the normal phase");
    const double w2 = mp.omega * mp.omega;
    const double gam = mp.omega * mp.e_z / std::sqrt(-mp.eps);
    const double c2 = std::cos(2.0 * d.chi);
    const double s2 = std::sin(2.0 * d.chi);
    const double e1sq = w2 + gam * (c2 - 1.0) / s2;
    const double e2sq = w2 + gam * (c2 + 1.0) / s2;
    if (e1sq <= 0.0 || e2sq <= 0.0)
        throw NumericError("energies_full: non-positive polariton energy");
    return {std::sqrt(e1sq), std::sqrt(e2sq)};
}

// Second cross-check route: the quadratic form's invariants written with the
// spin-mode frequency expressed through F and K. The K term carries the
// squared projection e_z^2/F^2, so it reduces to F^2 when K = 0 (eps = -1).
inline std::pair<double, double> energies_quadratic(const ModelParams& mp,
                                                    const DiagonalizationResult& d) {
    const double w2 = mp.omega * mp.omega;
    const double f = d.f_cap;
    const double fbar2 = f * f + 2.0 * mp.s * d.k_cap * (mp.e_z * mp.e_z) / f;
    const double gam = mp.omega * mp.e_z / std::sqrt(-mp.eps);
    const double r = std::hypot(fbar2 - w2, 2.0 * gam);
    const double e1sq = 0.5 * (w2 + fbar2 - r);
    const double e2sq = 0.5 * (w2 + fbar2 + r);
    if (e1sq <= 0.0 || e2sq <= 0.0)
        throw NumericError("energies_quadratic: non-positive polariton energy");
    return {std::sqrt(e1sq), std::sqrt(e2sq)};
}

// Coefficients of the canonical transformation d_m = alpha_m c + beta_m c^dag
//                                                  + gamma_m b + delta_m b^dag.
struct BogoliubovCoefficients {
    double alpha1 = 0.0, beta1 = 0.0, gamma1 = 0.0, delta1 = 0.0;
    double alpha2 = 0.0, beta2 = 0.0, gamma2 = 0.0, delta2 = 0.0;

    double norm1() const {
        return alpha1 * alpha1 - beta1 * beta1 + gamma1 * gamma1 - delta1 * delta1;
    }
    double norm2() const {
        return alpha2 * alpha2 - beta2 * beta2 + gamma2 * gamma2 - delta2 * delta2;
    }
};

inline BogoliubovCoefficients bogoliubov_coefficients(const DiagonalizationResult& d,
                                                      const ModelParams& mp) {
    const double cx = std::cos(d.chi);
    const double sx = std::sin(d.chi);
    const double w = mp.omega;
    const double f = d.f_cap;
    BogoliubovCoefficients bc;
    bc.alpha1 = 0.5 * cx * (std::sqrt(w / d.eps1) + std::sqrt(d.eps1 / w));
    bc.beta1 = 0.5 * cx * (std::sqrt(w / d.eps1) - std::sqrt(d.eps1 / w));
    bc.gamma1 = 0.5 * sx * (std::sqrt(f / d.eps1) + std::sqrt(d.eps1 / f));
    bc.delta1 = 0.5 * sx * (std::sqrt(f / d.eps1) - std::sqrt(d.eps1 / f));
    bc.alpha2 = -0.5 * sx * (std::sqrt(w / d.eps2) + std::sqrt(d.eps2 / w));
    bc.beta2 = -0.5 * sx * (std::sqrt(w / d.eps2) - std::sqrt(d.eps2 / w));
    bc.gamma2 = 0.5 * cx * (std::sqrt(f / d.eps2) + std::sqrt(d.eps2 / f));
    bc.delta2 = 0.5 * cx * (std::sqrt(f / d.eps2) - std::sqrt(d.eps2 / f));
    return bc;
}

// Forward map on the coefficient space (c, c^dag, b, b^dag) -> (d1, d1^dag, d2, d2^dag).
inline Eigen::Matrix4d bogoliubov_forward_matrix(const BogoliubovCoefficients& bc) {
    Eigen::Matrix4d m;
    m << bc.alpha1, bc.beta1, bc.gamma1, bc.delta1,
         bc.beta1, bc.alpha1, bc.delta1, bc.gamma1,
         bc.alpha2, bc.beta2, bc.gamma2, bc.delta2,
         bc.beta2, bc.alpha2, bc.delta2, bc.gamma2;
    return m;
}

// Inverse map built directly from (omega, F, eps_m, chi): per-channel squeeze
// brackets with the mixing rotation undone. Composing with the forward map
// must give the identity.
inline Eigen::Matrix4d bogoliubov_inverse_matrix(const DiagonalizationResult& d,
                                                 const ModelParams& mp) {
    const double cx = std::cos(d.chi);
    const double sx = std::sin(d.chi);
    const double w = mp.omega;
    const double f = d.f_cap;
    const double a1p = 0.5 * (std::sqrt(w / d.eps1) + std::sqrt(d.eps1 / w));
    const double a1m = 0.5 * (std::sqrt(w / d.eps1) - std::sqrt(d.eps1 / w));
    const double a2p = 0.5 * (std::sqrt(w / d.eps2) + std::sqrt(d.eps2 / w));
    const double a2m = 0.5 * (std::sqrt(w / d.eps2) - std::sqrt(d.eps2 / w));
    const double b1p = 0.5 * (std::sqrt(f / d.eps1) + std::sqrt(d.eps1 / f));
    const double b1m = 0.5 * (std::sqrt(f / d.eps1) - std::sqrt(d.eps1 / f));
    const double b2p = 0.5 * (std::sqrt(f / d.eps2) + std::sqrt(d.eps2 / f));
    const double b2m = 0.5 * (std::sqrt(f / d.eps2) - std::sqrt(d.eps2 / f));
    Eigen::Matrix4d m;
    // rows: c, c^dag, b, b^dag over columns (d1, d1^dag, d2, d2^dag)
    m << cx * a1p, -cx * a1m, -sx * a2p, sx * a2m,
         -cx * a1m, cx * a1p, sx * a2m, -sx * a2p,
         sx * b1p, -sx * b1m, cx * b2p, -cx * b2m,
         -sx * b1m, sx * b1p, -cx * b2m, cx * b2p;
    return m;
}

// Linear dissipator coefficients of the two polariton channels acting on the
// shifted/rotated semiclassical variables:
//   D_m[q~]  = -A_m q~ + B_m J_x        D_m[J_x] = -D_m J_x + E_m q~
//   D_m[p~]  = -A_m p~ + C_m J_y        D_m[J_y] = -D_m J_y + F_m p~
//   D_m[J_z] = 2 D_m (S - J_z) - C_m q~ J_x - B_m p~ J_y
struct DressedCoefficients {
    double a1 = 0.0, b1 = 0.0, c1 = 0.0, d1 = 0.0, e1 = 0.0, f1 = 0.0;
    double a2 = 0.0, b2 = 0.0, c2 = 0.0, d2 = 0.0, e2 = 0.0, f2 = 0.0;
};

inline DressedCoefficients dressed_coefficients(const DiagonalizationResult& d,
                                                const ModelParams& mp) {
    const double cx = std::cos(d.chi);
    const double sx = std::sin(d.chi);
    const double sc = 0.5 * sx * cx;
    const double w = mp.omega;
    const double f = d.f_cap;
    const double s = mp.s;
    DressedCoefficients dc;
    dc.a1 = 0.5 * cx * cx;
    dc.d1 = 0.5 * sx * sx;
    dc.a2 = 0.5 * sx * sx;
    dc.d2 = 0.5 * cx * cx;
    dc.b1 = -sc * std::sqrt(f / s) / w;
    dc.c1 = -sc * w / std::sqrt(s * f);
    dc.e1 = -sc * w * std::sqrt(s / f);
    dc.f1 = -sc * std::sqrt(s * f) / w;
    dc.b2 = -dc.b1;
    dc.c2 = -dc.c1;
    dc.e2 = -dc.e1;
    dc.f2 = -dc.f1;
    return dc;
}

// Same coefficients from the generic per-channel pipeline in terms of the raw
// Bogoliubov coefficients; used as a consistency check on the closed forms.
inline DressedCoefficients dressed_coefficients_generic(const BogoliubovCoefficients& bc,
                                                        const ModelParams& mp) {
    const double w = mp.omega;
    const double s = mp.s;
    auto channel = [&](double al, double be, double ga, double de, double* a, double* b,
                       double* c, double* dd, double* e, double* f) {
        *a = 0.5 * (al * al - be * be);
        *dd = 0.5 * (ga * ga - de * de);
        *b = 0.5 * (be - al) * (de + ga) / std::sqrt(w * s);
        *c = 0.5 * (al + be) * (de - ga) * std::sqrt(w / s);
        *e = 0.5 * (de - ga) * (al + be) * std::sqrt(w * s);
        *f = 0.5 * (de + ga) * (be - al) * std::sqrt(s / w);
    };
    DressedCoefficients dc;
    channel(bc.alpha1, bc.beta1, bc.gamma1, bc.delta1, &dc.a1, &dc.b1, &dc.c1, &dc.d1, &dc.e1,
            &dc.f1);
    channel(bc.alpha2, bc.beta2, bc.gamma2, bc.delta2, &dc.a2, &dc.b2, &dc.c2, &dc.d2, &dc.e2,
            &dc.f2);
    return dc;
}

// Environment coupled to one system quadrature; kappa(nu) = pi * spectral(nu).
// label distinguishes the photon ("a") and spin ("S") couplings in diagnostics.
struct BathSpec {
    std::function<double(double)> spectral;
    double temperature = 0.0;
    std::string label;

    double kappa(double nu) const {
        const double v = spectral ? spectral(nu) : 0.0;
        if (v < 0.0) throw ConfigError("bath '" + label + "': negative spectral density");
        return M_PI * v;
    }
};

inline BathSpec zero_bath(const std::string& label = "") {
    return {[](double) { return 0.0; }, 0.0, label};
}

inline BathSpec flat_bath(double eta, double temperature = 0.0, const std::string& label = "") {
    if (eta < 0.0) throw ConfigError("bath '" + label + "': eta must be >= 0");
    return {[eta](double) { return eta / M_PI; }, temperature, label};
}

inline BathSpec ohmic_bath(double eta, double nu_c, double temperature = 0.0,
                           const std::string& label = "") {
    if (eta < 0.0) throw ConfigError("bath '" + label + "': eta must be >= 0");
    if (!(nu_c > 0.0)) throw ConfigError("bath '" + label + "': cutoff must be > 0");
    return {[eta, nu_c](double nu) { return (eta / M_PI) * nu * std::exp(-nu / nu_c); },
            temperature, label};
}

// Effective channel viscosities: each polariton samples both baths at its own
// energy, weighted by its photon/spin content. Temperature does not enter here.
inline std::pair<double, double> effective_viscosities(const DiagonalizationResult& d,
                                                       const BathSpec& bath_a,
                                                       const BathSpec& bath_s,
                                                       const ModelParams& mp) {
    const double cx2 = std::cos(d.chi) * std::cos(d.chi);
    const double sx2 = std::sin(d.chi) * std::sin(d.chi);
    const double w = mp.omega;
    const double f = d.f_cap;
    const double k1 =
        d.eps1 * (cx2 * bath_a.kappa(d.eps1) / w + mp.s * sx2 * bath_s.kappa(d.eps1) / (2.0 * f));
    const double k2 =
        d.eps2 * (sx2 * bath_a.kappa(d.eps2) / w + mp.s * cx2 * bath_s.kappa(d.eps2) / (2.0 * f));
    return {k1, k2};
}

} // namespace edm

#endif
